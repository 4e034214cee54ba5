//! Random program generator producing fixture notation.

use proptest::prelude::*;

pub const SENSORS: [&str; 10] = [
    "dist()", "light()", "line()", "battery()", "colour()", "loud()", "pitch()", "roll()", "pot()", "shake()",
];

fn literal() -> impl Strategy<Value = String> {
    prop_oneof![
        (-250i32..1100).prop_map(|v| v.to_string()),
        (-20i32..20).prop_map(|v| format!("{}.5", v)),
        Just("$x".to_string()),
    ]
}

fn comparison() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["gt", "lt", "eq"]),
        prop::sample::select(SENSORS.to_vec()),
        literal(),
        any::<bool>(),
    )
        .prop_map(|(op, s, c, flip)| {
            if flip {
                format!("{op}({c},{s})")
            } else {
                format!("{op}({s},{c})")
            }
        })
}

pub fn condition() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => comparison(),
        1 => Just("button()".to_string()),
        1 => Just("gt($x,3)".to_string()),
        1 => (comparison(), comparison()).prop_map(|(a, b)| format!("and({a},{b})")),
    ]
}

fn power() -> impl Strategy<Value = String> {
    prop_oneof![
        8 => (-200i32..=200).prop_map(|v| v.to_string()),
        1 => Just("0".to_string()),
        1 => Just("$p".to_string()),
    ]
}

fn time() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["-1", "0", "0.5", "1", "$t"]).prop_map(str::to_string)
}

fn colour() -> impl Strategy<Value = String> {
    (-20i32..300).prop_map(|v| v.to_string())
}

fn direction() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["fwd", "back", "left", "right"])
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (colour(), colour(), colour()).prop_map(|(r, g, b)| format!("led_on({r},{g},{b})")),
        (colour(), time()).prop_map(|(r, t)| format!("led_on_timed({r},0,0,{t})")),
        Just("led_off()".to_string()),
        colour().prop_map(|c| format!("light_on({c})")),
        Just("light_off()".to_string()),
        Just("matrix_show(\"hi\")".to_string()),
        Just("matrix_off()".to_string()),
        (direction(), power()).prop_map(|(d, p)| format!("move({d},{p})")),
        (direction(), power(), time()).prop_map(|(d, p, t)| format!("move_timed({d},{p},{t})")),
        (power(), time()).prop_map(|(p, t)| format!("motor_run_timed(port1,{p},{t})")),
        Just("motor_stop()".to_string()),
        time().prop_map(|t| format!("wait({t})")),
        Just("set_var(x, 1)".to_string()),
        Just("change_var(x, 1)".to_string()),
        Just("stop_all()".to_string()),
        Just("stop_other()".to_string()),
        condition().prop_map(|c| format!("wait_until({c})")),
    ]
}

pub fn body() -> impl Strategy<Value = String> {
    let stmt = leaf().prop_recursive(3, 24, 4, |inner| {
        let block = prop::collection::vec(inner, 0..4).prop_map(|v| v.join("; "));
        prop_oneof![
            block.clone().prop_map(|b| format!("forever[{b}]")),
            (1u32..5, block.clone()).prop_map(|(n, b)| format!("repeat({n})[{b}]")),
            (condition(), block.clone()).prop_map(|(c, b)| format!("repeat_until({c})[{b}]")),
            (condition(), block.clone()).prop_map(|(c, b)| format!("if({c})[{b}]")),
            (condition(), block.clone(), block).prop_map(|(c, a, b)| format!("if({c})[{a}] else [{b}]")),
        ]
    });
    prop::collection::vec(stmt, 0..6).prop_map(|v| v.join("; "))
}

pub fn script() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["on_flag", "on_start", "on_btn", "on_msg(\"a\")"]),
        body(),
    )
        .prop_map(|(hat, body)| {
            if body.is_empty() {
                format!("[{hat}]")
            } else {
                format!("[{hat}; {body}]")
            }
        })
}

#[derive(Debug, Clone)]
pub struct Program {
    pub actors: Vec<(String, Vec<String>)>,
}

impl Program {
    pub fn source(&self) -> String {
        self.actors
            .iter()
            .map(|(device, scripts)| format!("{device}{{{}}}", scripts.join(" ")))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn program() -> impl Strategy<Value = Program> {
    prop::collection::vec(
        (
            prop::sample::select(vec!["mcore", "codey"]),
            prop::collection::vec(script(), 0..4),
        )
            .prop_map(|(d, s)| (d.to_string(), s)),
        1..3,
    )
    .prop_map(|actors| Program { actors })
}
