//! The code perfume catalogue and its AST pattern matchers.

mod finders;

use std::fmt;

pub use finders::*;

use crate::ast::ProgramAst;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerfumeKind {
    BackdropSwitch,
    BooleanExpression,
    Collision,
    ConditionalInsideLoop,
    ControlledBroadcastOrStop,
    Coordination,
    CorrectBroadcast,
    CustomBlockUsage,
    DirectedMotion,
    GlidingMotion,
    InitialisationOfLooks,
    InitialisationOfPosition,
    ListUsage,
    LoopSensing,
    MatchingParameter,
    MouseFollower,
    MovementInLoop,
    NestedConditionalChecks,
    NestedLoops,
    ObjectFollower,
    Parallelisation,
    SaySoundSynchronisation,
    Timer,
    UsefulPositionCheck,
    ValidTermination,
}

impl PerfumeKind {
    pub const ALL: [PerfumeKind; 25] = [
        PerfumeKind::BackdropSwitch,
        PerfumeKind::BooleanExpression,
        PerfumeKind::Collision,
        PerfumeKind::ConditionalInsideLoop,
        PerfumeKind::ControlledBroadcastOrStop,
        PerfumeKind::Coordination,
        PerfumeKind::CorrectBroadcast,
        PerfumeKind::CustomBlockUsage,
        PerfumeKind::DirectedMotion,
        PerfumeKind::GlidingMotion,
        PerfumeKind::InitialisationOfLooks,
        PerfumeKind::InitialisationOfPosition,
        PerfumeKind::ListUsage,
        PerfumeKind::LoopSensing,
        PerfumeKind::MatchingParameter,
        PerfumeKind::MouseFollower,
        PerfumeKind::MovementInLoop,
        PerfumeKind::NestedConditionalChecks,
        PerfumeKind::NestedLoops,
        PerfumeKind::ObjectFollower,
        PerfumeKind::Parallelisation,
        PerfumeKind::SaySoundSynchronisation,
        PerfumeKind::Timer,
        PerfumeKind::UsefulPositionCheck,
        PerfumeKind::ValidTermination,
    ];

    /// Stable identifier used in JSON and CSV output.
    pub fn machine_name(self) -> &'static str {
        use PerfumeKind::*;
        match self {
            BackdropSwitch => "backdrop_switch",
            BooleanExpression => "boolean_expression",
            Collision => "collision",
            ConditionalInsideLoop => "conditional_inside_loop",
            ControlledBroadcastOrStop => "controlled_broadcast_or_stop",
            Coordination => "coordination",
            CorrectBroadcast => "correct_broadcast",
            CustomBlockUsage => "custom_block_usage",
            DirectedMotion => "directed_motion",
            GlidingMotion => "gliding_motion",
            InitialisationOfLooks => "initialisation_of_looks",
            InitialisationOfPosition => "initialisation_of_position",
            ListUsage => "list_usage",
            LoopSensing => "loop_sensing",
            MatchingParameter => "matching_parameter",
            MouseFollower => "mouse_follower",
            MovementInLoop => "movement_in_loop",
            NestedConditionalChecks => "nested_conditional_checks",
            NestedLoops => "nested_loops",
            ObjectFollower => "object_follower",
            Parallelisation => "parallelisation",
            SaySoundSynchronisation => "say_sound_synchronisation",
            Timer => "timer",
            UsefulPositionCheck => "useful_position_check",
            ValidTermination => "valid_termination",
        }
    }

    pub fn from_machine_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.machine_name() == name)
    }

    pub fn display_name(self) -> &'static str {
        use PerfumeKind::*;
        match self {
            BackdropSwitch => "Backdrop Switch",
            BooleanExpression => "Boolean Expression",
            Collision => "Collision",
            ConditionalInsideLoop => "Conditional Inside Loop",
            ControlledBroadcastOrStop => "Controlled Broadcast Or Stop",
            Coordination => "Coordination",
            CorrectBroadcast => "Correct Broadcast",
            CustomBlockUsage => "Custom Block Usage",
            DirectedMotion => "Directed Motion",
            GlidingMotion => "Gliding Motion",
            InitialisationOfLooks => "Initialisation Of Looks",
            InitialisationOfPosition => "Initialisation Of Position",
            ListUsage => "List Usage",
            LoopSensing => "Loop Sensing",
            MatchingParameter => "Matching Parameter",
            MouseFollower => "Mouse Follower",
            MovementInLoop => "Movement In Loop",
            NestedConditionalChecks => "Nested Conditional Checks",
            NestedLoops => "Nested Loops",
            ObjectFollower => "Object Follower",
            Parallelisation => "Parallelisation",
            SaySoundSynchronisation => "Say Sound Synchronisation",
            Timer => "Timer",
            UsefulPositionCheck => "Useful Position Check",
            ValidTermination => "Valid Termination",
        }
    }

    /// One sentence of praise shown to the learner.
    pub fn feedback(self) -> &'static str {
        use PerfumeKind::*;
        match self {
            BackdropSwitch => "Well done! You switch the backdrop and have scripts that start when it changes, so your scene changes drive the action.",
            BooleanExpression => "Nice! You combine comparisons with and/or/not to express a precise condition.",
            Collision => "Great! Your sprite keeps checking for collisions and reacts by moving or changing its look.",
            ConditionalInsideLoop => "Good job! You check a condition again and again inside a loop.",
            ControlledBroadcastOrStop => "Well done! A condition inside a loop decides exactly when to broadcast or stop.",
            Coordination => "Nice! You use a wait-until block to coordinate your scripts with what is happening.",
            CorrectBroadcast => "Great! Every message you send here also has a script that receives it.",
            CustomBlockUsage => "Well done! You defined your own block and actually use it.",
            DirectedMotion => "Nice! Pressing a key points your sprite in a direction and then moves it.",
            GlidingMotion => "Good job! Pressing a key makes your sprite glide smoothly.",
            InitialisationOfLooks => "Great! You set up how things look when the green flag is clicked.",
            InitialisationOfPosition => "Great! You set the starting position when the green flag is clicked.",
            ListUsage => "Well done! You use a list to keep track of several values.",
            LoopSensing => "Great job! You keep checking for an event inside a loop, so your program notices it at any moment.",
            MatchingParameter => "Nice! Every input your custom block uses is declared in its definition.",
            MouseFollower => "Good job! Your sprite keeps following the mouse pointer inside a loop.",
            MovementInLoop => "Great! You check the keyboard inside a loop, which gives smooth movement.",
            NestedConditionalChecks => "Well done! You nest if blocks to handle more detailed situations.",
            NestedLoops => "Nice! You put a loop inside another loop together with other blocks.",
            ObjectFollower => "Good job! Your sprite points towards another sprite and moves to follow it.",
            Parallelisation => "Great! Several scripts start on the same event and run side by side.",
            SaySoundSynchronisation => "Well done! The speech bubble stays up exactly while the sound plays.",
            Timer => "Nice! You built a timer that changes a variable step by step while waiting.",
            UsefulPositionCheck => "Great! You compare positions with greater-than or less-than, which works even when values are not exact.",
            ValidTermination => "Good job! Your repeat-until loop has a condition that can end it.",
        }
    }
}

impl fmt::Display for PerfumeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfumeInstance {
    pub kind: PerfumeKind,
    pub target_index: usize,
    pub target_name: String,
    pub anchor_block_id: String,
    /// Short context such as a message, variable or custom block name.
    pub detail: String,
}

/// Signature shared by all finders.
pub type Finder = fn(&ProgramAst) -> Vec<PerfumeInstance>;

pub fn finder(kind: PerfumeKind) -> Finder {
    use PerfumeKind::*;
    match kind {
        BackdropSwitch => find_backdrop_switch,
        BooleanExpression => find_boolean_expression,
        Collision => find_collision,
        ConditionalInsideLoop => find_conditional_inside_loop,
        ControlledBroadcastOrStop => find_controlled_broadcast_or_stop,
        Coordination => find_coordination,
        CorrectBroadcast => find_correct_broadcast,
        CustomBlockUsage => find_custom_block_usage,
        DirectedMotion => find_directed_motion,
        GlidingMotion => find_gliding_motion,
        InitialisationOfLooks => find_initialisation_of_looks,
        InitialisationOfPosition => find_initialisation_of_position,
        ListUsage => find_list_usage,
        LoopSensing => find_loop_sensing,
        MatchingParameter => find_matching_parameter,
        MouseFollower => find_mouse_follower,
        MovementInLoop => find_movement_in_loop,
        NestedConditionalChecks => find_nested_conditional_checks,
        NestedLoops => find_nested_loops,
        ObjectFollower => find_object_follower,
        Parallelisation => find_parallelisation,
        SaySoundSynchronisation => find_say_sound_synchronisation,
        Timer => find_timer,
        UsefulPositionCheck => find_useful_position_check,
        ValidTermination => find_valid_termination,
    }
}

/// Runs every finder. Output is ordered by kind, then target, then anchor.
pub fn find_all(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    PerfumeKind::ALL
        .into_iter()
        .flat_map(|k| finder(k)(ast))
        .collect()
}
