mod common;

use gramweave::repl::suggest_repl;

fn run(input: &str, k: usize) -> Vec<String> {
    let model = common::toy_model();
    let mut out = Vec::new();
    suggest_repl(&model, k, input.as_bytes(), &mut out).unwrap();
    String::from_utf8(out).unwrap().lines().map(String::from).collect()
}

fn tokens(line: &str) -> Vec<&str> {
    line.split("  ").map(|p| p.split(' ').next().unwrap()).collect()
}

#[test]
fn answers_each_line_until_blank() {
    let lines = run("the weather\nthe weather is\n\nthe\n", 3);
    assert_eq!(lines.len(), 2);
    let first = tokens(&lines[0]);
    assert!(first.contains(&"is") && first.contains(&"forecast"), "{lines:?}");
    assert!(["good", "sunny"].contains(&tokens(&lines[1])[0]), "{lines:?}");
}

#[test]
fn k_controls_suggestion_count() {
    let lines = run("the weather\nthe\n", 1);
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| tokens(l).len() == 1));
    let line = &lines[0];
    let prob: f32 = line[line.find('(').unwrap() + 1..line.find(')').unwrap()].parse().unwrap();
    assert!(prob > 0.0 && prob <= 1.0);
}

#[test]
fn unusable_context_reports_and_continues() {
    let lines = run("zebra\nthe\n", 2);
    assert_eq!(lines[0], "error: no usable context");
    assert_eq!(tokens(&lines[1]).len(), 2);
}

#[test]
fn end_of_input_exits() {
    assert!(run("", 5).is_empty());
    assert_eq!(run("the", 5).len(), 1);
}
