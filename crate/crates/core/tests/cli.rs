use std::io::Write;
use std::process::{Command, Output, Stdio};

fn expzero(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expzero")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn verify_stdin(text: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_expzero"))
        .args(["verify", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn term_commands() {
    let o = expzero(&["canon", "--pretty", "2*exp(y+1)+3*exp(y)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(3+2*exp(1))*exp(y)");
    let o = expzero(&["diff", "--var", "y", "exp(x*y)"]);
    assert_eq!(stdout(&o).trim(), "x*exp(x*y)");
    assert_eq!(expzero(&["parse", "exp(y"]).status.code(), Some(1));
    assert_eq!(expzero(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(expzero(&["--help"]).status.code(), Some(0));
}

#[test]
fn decide_then_verify() {
    for at in ["x=0", "x=1", "x=-1", "x=1i"] {
        let o = expzero(&["decide", "--term", "exp(y)-x", "--x", "x", "--y", "y", "--at", at]);
        assert_eq!(o.status.code(), Some(0), "{at}");
        let cert = stdout(&o);
        let want = if at == "x=0" { "VERDICT NOT_IN" } else { "VERDICT IN" };
        assert_eq!(cert.lines().next(), Some(want));
        let v = verify_stdin(&cert);
        assert_eq!(v.status.code(), Some(0), "{cert}");
        assert!(stdout(&v).starts_with("VALID"));
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let o = expzero(&["decide", "--term", "exp(y)-x", "--x", "x", "--y", "y", "--at", "x=0"]);
    let cert = stdout(&o).replace("at.x=0", "at.x=1");
    assert_ne!(cert, stdout(&o));
    let v = verify_stdin(&cert);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).starts_with("INVALID"));
}

#[test]
fn unknown_exits_two() {
    let o = expzero(&[
        "decide", "--term", "exp(y)+exp(2*y)", "--y", "y", "--max-weight", "1", "--max-height", "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("VERDICT UNKNOWN"));
    // an UNKNOWN record carries no certificate
    assert_eq!(verify_stdin(&stdout(&o)).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let bad: [&[&str]; 4] = [
        &["decide", "--term", "exp(y)-x", "--x", "x", "--y", "y"],
        &["decide", "--term", "exp(y)-x", "--x", "x", "--y", "y", "--at", "x=i"],
        &["decide", "--term", "exp(y)-x", "--x", "x", "--y", "x", "--at", "x=0"],
        &["verify", "/nonexistent/cert"],
    ];
    for args in bad {
        assert_eq!(expzero(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn clause_stream_restarts() {
    let all = stdout(&expzero(&["clauses", "--term", "exp(y)-x", "--x", "x", "--y", "y", "--max-weight", "2"]));
    let lines: Vec<&str> = all.lines().collect();
    assert!(lines[0].starts_with("Z\t"));
    // constants 0, 1 and x come first; Q = y is the fourth candidate
    assert_eq!(lines[4], "3\t(E (y) in Q^1 : exp(y)-x != 0) & (A (y) in Q^1 : x = 0)");
    let tail = stdout(&expzero(&[
        "clauses", "--term", "exp(y)-x", "--x", "x", "--y", "y", "--max-weight", "2", "--start", "3",
    ]));
    assert_eq!(tail.lines().collect::<Vec<_>>(), lines[4..]);
}
