//! Commands, reports and the `key=value` record format.

use ellis_kit::report::{parse_record, render_report, run_command, Command, Format, Verb};

fn main() {
    let c = Command::new(Verb::Iterate, "builtin:swap2").with_point("A(3)").with_class("2k+1");
    print!("{}", render_report(&run_command(&c), Format::Text));

    let c = Command::new(Verb::Report, "builtin:collapse2").with_format(Format::Lines);
    let r = run_command(&c);
    let out = render_report(&r, Format::Lines);
    for line in out.lines().filter(|l| l.starts_with("expect.") || l.starts_with("classify")) {
        let (k, v) = parse_record(line).expect("records parse");
        println!("{k} -> {v}");
    }
    println!("exit code {}", r.exit_code);
}
