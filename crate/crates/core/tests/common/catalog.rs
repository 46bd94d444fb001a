//! One minimal positive and one near-miss negative project per perfume.

use serde_json::Value;

use super::*;
use scratch_perfumes::perfumes::PerfumeKind;

pub struct Case {
    pub kind: PerfumeKind,
    pub positive: Value,
    pub negative: Value,
    /// Instances the positive fixture must yield. One everywhere except
    /// Parallelisation, whose smallest group has two member scripts.
    pub expected: usize,
}

fn sprite(scripts: Vec<Vec<Blk>>) -> Value {
    let mut t = Tgt::sprite("Sprite1");
    t.scripts = scripts;
    project_json(&[Tgt::stage(), t])
}

fn flag(body: Vec<Blk>) -> Vec<Blk> {
    std::iter::once(green_flag()).chain(body).collect()
}

fn var(name: &str) -> In {
    In::Var(name.into())
}

pub fn cases() -> Vec<Case> {
    use PerfumeKind::*;
    let case = |kind, positive, negative| Case {
        kind,
        positive,
        negative,
        expected: 1,
    };
    vec![
        case(
            BackdropSwitch,
            project_json(&[
                Tgt::stage().script(flag(vec![switch_backdrop("Level2")])),
                Tgt::sprite("Sprite1").script(vec![when_backdrop("Level2"), show()]),
            ]),
            project_json(&[
                Tgt::stage().script(flag(vec![switch_backdrop("Level2")])),
                Tgt::sprite("Sprite1").script(vec![when_backdrop("Level3"), show()]),
            ]),
        ),
        case(
            BooleanExpression,
            sprite(vec![flag(vec![if_(
                and(key_pressed("space"), cmp("equals", var("score"), num("10"))),
                vec![say("Win")],
            )])]),
            sprite(vec![flag(vec![if_(
                and(cmp("equals", num("1"), num("1")), key_pressed("space")),
                vec![say("Win")],
            )])]),
        ),
        case(
            Collision,
            sprite(vec![flag(vec![forever(vec![if_(
                touching("Wall"),
                vec![change_y("-10")],
            )])])]),
            sprite(vec![flag(vec![if_(
                touching("Wall"),
                vec![change_y("-10")],
            )])]),
        ),
        case(
            ConditionalInsideLoop,
            sprite(vec![flag(vec![forever(vec![if_(
                cmp("gt", var("score"), num("10")),
                vec![say("High")],
            )])])]),
            sprite(vec![flag(vec![if_(
                cmp("gt", var("score"), num("10")),
                vec![say("High")],
            )])]),
        ),
        case(
            ControlledBroadcastOrStop,
            sprite(vec![flag(vec![forever(vec![if_(
                cmp("equals", var("lives"), num("0")),
                vec![stop_all()],
            )])])]),
            sprite(vec![flag(vec![if_(
                cmp("equals", var("lives"), num("0")),
                vec![stop_all()],
            )])]),
        ),
        case(
            Coordination,
            sprite(vec![flag(vec![
                wait_until(key_pressed("space")),
                say("Go"),
            ])]),
            sprite(vec![flag(vec![wait(num("1")), say("Go")])]),
        ),
        case(
            CorrectBroadcast,
            sprite(vec![
                flag(vec![broadcast("go")]),
                vec![when_receive("go"), say("Going")],
            ]),
            sprite(vec![
                flag(vec![broadcast("go")]),
                vec![when_receive("stop"), say("Stopping")],
            ]),
        ),
        case(
            CustomBlockUsage,
            sprite(vec![
                vec![define("jump", &[]), change_y("10")],
                flag(vec![call("jump", vec![])]),
            ]),
            sprite(vec![
                vec![define("jump", &[]), change_y("10")],
                flag(vec![say("no jump")]),
            ]),
        ),
        case(
            DirectedMotion,
            sprite(vec![vec![
                when_key("right arrow"),
                point_in_direction("90"),
                move_steps("10"),
            ]]),
            sprite(vec![vec![
                when_key("right arrow"),
                move_steps("10"),
                point_in_direction("90"),
            ]]),
        ),
        case(
            GlidingMotion,
            sprite(vec![vec![when_key("space"), glide_to_xy("1", "0", "100")]]),
            sprite(vec![flag(vec![glide_to_xy("1", "0", "100")])]),
        ),
        case(
            InitialisationOfLooks,
            sprite(vec![flag(vec![switch_costume("costume1")])]),
            sprite(vec![vec![when_clicked(), switch_costume("costume1")]]),
        ),
        case(
            InitialisationOfPosition,
            sprite(vec![flag(vec![go_to_xy("0", "0")])]),
            sprite(vec![vec![when_clicked(), go_to_xy("0", "0")]]),
        ),
        case(
            ListUsage,
            project_json(&[
                Tgt::stage(),
                Tgt::sprite("Sprite1")
                    .list("items")
                    .script(flag(vec![add_to_list("items", text("apple"))])),
            ]),
            project_json(&[
                Tgt::stage(),
                Tgt::sprite("Sprite1").script(flag(vec![add_to_list("items", text("apple"))])),
            ]),
        ),
        case(LoopSensing, polling_loop(), single_check()),
        case(
            MatchingParameter,
            sprite(vec![vec![
                define("jump %s", &["height"]),
                Blk::new("motion_changeyby").input("DY", blk(arg("height"))),
            ]]),
            sprite(vec![vec![
                define("jump %s", &["height"]),
                Blk::new("motion_changeyby").input("DY", blk(arg("speed"))),
            ]]),
        ),
        case(
            MouseFollower,
            sprite(vec![flag(vec![forever(vec![go_to("_mouse_")])])]),
            sprite(vec![flag(vec![forever(vec![go_to("_random_")])])]),
        ),
        case(
            MovementInLoop,
            sprite(vec![flag(vec![forever(vec![if_(
                key_pressed("right arrow"),
                vec![move_steps("10")],
            )])])]),
            sprite(vec![flag(vec![forever(vec![if_(
                key_pressed("right arrow"),
                vec![say("right")],
            )])])]),
        ),
        case(
            NestedConditionalChecks,
            sprite(vec![flag(vec![if_(
                key_pressed("space"),
                vec![if_(mouse_down(), vec![say("both")])],
            )])]),
            sprite(vec![flag(vec![
                if_(key_pressed("space"), vec![say("space")]),
                if_(mouse_down(), vec![say("mouse")]),
            ])]),
        ),
        case(
            NestedLoops,
            sprite(vec![flag(vec![repeat(
                "3",
                vec![repeat("4", vec![move_steps("10")]), say("row")],
            )])]),
            sprite(vec![flag(vec![repeat(
                "3",
                vec![repeat("4", vec![move_steps("10")])],
            )])]),
        ),
        case(
            ObjectFollower,
            sprite(vec![flag(vec![forever(vec![
                point_towards("Cat"),
                move_steps("5"),
            ])])]),
            sprite(vec![flag(vec![forever(vec![
                move_steps("5"),
                point_towards("Cat"),
            ])])]),
        ),
        Case {
            kind: Parallelisation,
            positive: sprite(vec![flag(vec![say("hi")]), flag(vec![move_steps("10")])]),
            negative: sprite(vec![
                flag(vec![say("hi")]),
                vec![when_key("space"), move_steps("10")],
            ]),
            expected: 2,
        },
        case(
            SaySoundSynchronisation,
            sprite(vec![flag(vec![
                say("Meow"),
                play_until_done("Meow"),
                say(""),
            ])]),
            sprite(vec![flag(vec![say("Meow"), play("Meow"), say("")])]),
        ),
        case(
            Timer,
            sprite(vec![flag(vec![forever(vec![
                wait(num("1")),
                change_var("time", num("1")),
            ])])]),
            sprite(vec![flag(vec![forever(vec![
                wait(var("delay")),
                change_var("time", num("1")),
            ])])]),
        ),
        case(
            UsefulPositionCheck,
            sprite(vec![flag(vec![forever(vec![if_(
                cmp("gt", blk(x_position()), num("200")),
                vec![set_x("-200")],
            )])])]),
            sprite(vec![flag(vec![forever(vec![if_(
                cmp("equals", blk(x_position()), num("200")),
                vec![set_x("-200")],
            )])])]),
        ),
        case(
            ValidTermination,
            sprite(vec![flag(vec![repeat_until(
                Some(touching("_edge_")),
                vec![move_steps("10")],
            )])]),
            sprite(vec![flag(vec![repeat_until(None, vec![move_steps("10")])])]),
        ),
    ]
}
