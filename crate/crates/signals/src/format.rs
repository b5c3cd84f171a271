//! Text format for signal games.
//!
//! ```text
//! game example
//!
//! [states]
//! active: lo, hi
//! win = 1
//!
//! [actions]
//! A = wait, stop
//! B = pass, block
//!
//! [signals]
//! D = pass.on, block.on, stop.pass.win
//! C = wait.pass.lo?, wait.pass.hi?, stop.pass.win
//!
//! [maps i_hat, j_hat, d_hat]
//! j_hat pass.on -> pass
//! i_hat wait.pass.lo? -> wait
//! d_hat wait.pass.lo? -> pass.on
//!
//! [transitions]
//! lo wait pass -> 3/4 lo wait.pass.lo?, 1/4 hi wait.pass.hi?
//!
//! [pi]
//! C = start.lo?, start.hi?
//! D = start
//! 1/2 lo start.lo? start
//! ```
//!
//! Each transition outcome names the next state and player 1's signal;
//! player 2's signal is the one that signal determines. The stage-1
//! distribution has its own signal names. A bundled game is a single line
//! `builtin <name>`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;
use recgame_core::state::{format_rational, parse_rational};
use recgame_core::Rational;

use crate::game::{builtin, InitialDist, Outcome, SignalError, SignalGame};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    States,
    Actions,
    Signals,
    Maps,
    Transitions,
    Pi,
}

fn err(line: usize, message: impl Into<String>) -> SignalError {
    SignalError::Parse {
        line,
        message: message.into(),
    }
}

fn names(line: usize, s: &str) -> Result<Vec<String>, SignalError> {
    let out: Vec<String> = s.split(',').map(|a| a.trim().to_string()).collect();
    if out
        .iter()
        .any(|a| a.is_empty() || a.contains(char::is_whitespace))
    {
        return Err(err(line, "malformed name list"));
    }
    Ok(out)
}

fn lookup(line: usize, list: &[String], name: &str, what: &str) -> Result<usize, SignalError> {
    list.iter()
        .position(|s| s == name)
        .ok_or_else(|| err(line, format!("unknown {what} `{name}`")))
}

fn prob(line: usize, s: &str) -> Result<Rational, SignalError> {
    parse_rational(s).ok_or_else(|| err(line, format!("invalid probability `{s}`")))
}

/// Parses and validates a signal game.
pub fn load(text: &str) -> Result<SignalGame, SignalError> {
    let mut section = Section::Header;
    let mut name = "unnamed".to_string();
    let mut active: Vec<String> = Vec::new();
    let mut absorbing: Vec<(String, Rational)> = Vec::new();
    let (mut a1, mut a2) = (Vec::new(), Vec::new());
    let (mut c_names, mut d_names) = (Vec::new(), Vec::new());
    let mut maps: BTreeMap<(&'static str, String), (usize, String)> = BTreeMap::new();
    let mut transitions: Vec<(usize, String)> = Vec::new();
    let mut pi_lines: Vec<(usize, String)> = Vec::new();
    let mut prior = InitialDist::default();
    let mut generated = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if generated.is_some() {
            return Err(err(line_no, "nothing may follow a builtin declaration"));
        }
        if line.starts_with('[') {
            section = match line {
                "[states]" => Section::States,
                "[actions]" => Section::Actions,
                "[signals]" => Section::Signals,
                "[maps i_hat, j_hat, d_hat]" => Section::Maps,
                "[transitions]" => Section::Transitions,
                "[pi]" => Section::Pi,
                _ => return Err(err(line_no, format!("unknown section {line}"))),
            };
            continue;
        }
        match section {
            Section::Header => match line.split_once(char::is_whitespace) {
                Some(("game", rest)) => name = rest.trim().to_string(),
                Some(("builtin", rest)) => {
                    let g = builtin(rest.trim()).ok_or_else(|| {
                        err(line_no, format!("unknown builtin `{}`", rest.trim()))
                    })?;
                    generated = Some(g);
                }
                _ => return Err(err(line_no, format!("unexpected `{line}`"))),
            },
            Section::States => {
                if let Some(rest) = line.strip_prefix("active:") {
                    active.extend(names(line_no, rest)?);
                } else if let Some((s, g)) = line.split_once('=') {
                    let g = parse_rational(g)
                        .ok_or_else(|| err(line_no, format!("invalid payoff `{}`", g.trim())))?;
                    absorbing.push((s.trim().to_string(), g));
                } else {
                    return Err(err(line_no, "expected `active: ...` or `state = payoff`"));
                }
            }
            Section::Actions | Section::Signals => {
                let (key, rest) = line
                    .split_once('=')
                    .ok_or_else(|| err(line_no, "expected `X = a, b, ...`"))?;
                let list = names(line_no, rest)?;
                match (section, key.trim()) {
                    (Section::Actions, "A") => a1 = list,
                    (Section::Actions, "B") => a2 = list,
                    (Section::Signals, "C") => c_names = list,
                    (Section::Signals, "D") => d_names = list,
                    _ => return Err(err(line_no, format!("unexpected key `{}`", key.trim()))),
                }
            }
            Section::Maps => {
                let (lhs, rhs) = line
                    .split_once("->")
                    .ok_or_else(|| err(line_no, "expected `map signal -> value`"))?;
                let mut it = lhs.split_whitespace();
                let map = match it.next() {
                    Some("i_hat") => "i_hat",
                    Some("j_hat") => "j_hat",
                    Some("d_hat") => "d_hat",
                    _ => return Err(err(line_no, "expected i_hat, j_hat or d_hat")),
                };
                let sig = it
                    .next()
                    .ok_or_else(|| err(line_no, "missing signal"))?
                    .to_string();
                if maps
                    .insert((map, sig.clone()), (line_no, rhs.trim().to_string()))
                    .is_some()
                {
                    return Err(err(line_no, format!("{map} of `{sig}` given twice")));
                }
            }
            Section::Transitions => transitions.push((line_no, line.to_string())),
            Section::Pi => {
                if let Some((key, rest)) = line.split_once('=') {
                    match key.trim() {
                        "C" => prior.signals_1 = names(line_no, rest)?,
                        "D" => prior.signals_2 = names(line_no, rest)?,
                        k => return Err(err(line_no, format!("unexpected key `{k}`"))),
                    }
                } else {
                    pi_lines.push((line_no, line.to_string()));
                }
            }
        }
    }
    if let Some(g) = generated {
        return Ok(g);
    }

    let act: Vec<&str> = active.iter().map(String::as_str).collect();
    let abs: Vec<(&str, Rational)> = absorbing
        .iter()
        .map(|(s, g)| (s.as_str(), g.clone()))
        .collect();
    let a1r: Vec<&str> = a1.iter().map(String::as_str).collect();
    let a2r: Vec<&str> = a2.iter().map(String::as_str).collect();
    let mut g = SignalGame::new(name, &act, &abs, &a1r, &a2r);
    let map_of = |map: &'static str, sig: &str| -> Result<(usize, String), SignalError> {
        maps.get(&(map, sig.to_string()))
            .cloned()
            .ok_or_else(|| err(0, format!("missing {map} for `{sig}`")))
    };
    for d in &d_names {
        let (line, j) = map_of("j_hat", d)?;
        let j = lookup(line, &g.actions_2, &j, "action")?;
        g.signal_2(d.clone(), j);
    }
    for c in &c_names {
        let (line, i) = map_of("i_hat", c)?;
        let i = lookup(line, &g.actions_1, &i, "action")?;
        let (line, d) = map_of("d_hat", c)?;
        let d = lookup(line, &d_names, &d, "signal")?;
        g.signal_1(c.clone(), i, d);
    }
    for ((map, sig), (line, _)) in &maps {
        let known = if *map == "j_hat" { &d_names } else { &c_names };
        lookup(*line, known, sig, "signal")?;
    }

    for (line, text) in transitions {
        let (lhs, rhs) = text
            .split_once("->")
            .ok_or_else(|| err(line, "expected `state a b -> outcomes`"))?;
        let parts: Vec<&str> = lhs.split_whitespace().collect();
        let [k, i, j] = parts[..] else {
            return Err(err(line, "expected `state a b`"));
        };
        let k = lookup(line, &g.states, k, "state")?;
        let i = lookup(line, &g.actions_1, i, "action")?;
        let j = lookup(line, &g.actions_2, j, "action")?;
        if !g.transition(k, i, j).is_empty() {
            return Err(err(line, "transition given twice"));
        }
        let mut outs = Vec::new();
        for entry in rhs.split(',') {
            let parts: Vec<&str> = entry.split_whitespace().collect();
            let [p, k2, c] = parts[..] else {
                return Err(err(line, "expected `p state signal`"));
            };
            let k2 = lookup(line, &g.states, k2, "state")?;
            let c = lookup(line, &g.signals_1, c, "signal")?;
            outs.push((k2, c, g.d_hat[c], prob(line, p)?));
        }
        g.set_transition(k, i, j, outs);
    }
    for (line, text) in pi_lines {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let [p, k, c, d] = parts[..] else {
            return Err(err(line, "expected `p state c d`"));
        };
        let k = lookup(line, &g.states, k, "state")?;
        let c = lookup(line, &prior.signals_1, c, "signal")?;
        let d = lookup(line, &prior.signals_2, d, "signal")?;
        let p = prob(line, p)?;
        if !p.is_zero() {
            *prior.mass.entry((k, c, d)).or_insert_with(Rational::zero) += p;
        }
    }
    g.prior = prior;
    g.validate()?;
    Ok(g)
}

/// Canonical text of a signal game.
pub fn save(g: &SignalGame) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "game {}", g.name);
    out.push_str("\n[states]\n");
    let active: Vec<&str> = g.active_states().map(|k| g.states[k].as_str()).collect();
    let _ = writeln!(out, "active: {}", active.join(", "));
    for (k, p) in g.payoffs.iter().enumerate() {
        if let Some(p) = p {
            let _ = writeln!(out, "{} = {}", g.states[k], format_rational(p));
        }
    }
    out.push_str("\n[actions]\n");
    let _ = writeln!(out, "A = {}", g.actions_1.join(", "));
    let _ = writeln!(out, "B = {}", g.actions_2.join(", "));
    out.push_str("\n[signals]\n");
    let _ = writeln!(out, "D = {}", g.signals_2.join(", "));
    let _ = writeln!(out, "C = {}", g.signals_1.join(", "));
    out.push_str("\n[maps i_hat, j_hat, d_hat]\n");
    for (d, name) in g.signals_2.iter().enumerate() {
        let _ = writeln!(out, "j_hat {name} -> {}", g.actions_2[g.j_hat[d]]);
    }
    for (c, name) in g.signals_1.iter().enumerate() {
        let _ = writeln!(out, "i_hat {name} -> {}", g.actions_1[g.i_hat[c]]);
        let _ = writeln!(out, "d_hat {name} -> {}", g.signals_2[g.d_hat[c]]);
    }
    out.push_str("\n[transitions]\n");
    for k in 0..g.n_states() {
        for i in 0..g.actions_1.len() {
            for j in 0..g.actions_2.len() {
                let outs: Vec<String> = g
                    .transition(k, i, j)
                    .iter()
                    .map(|Outcome { state, c, prob, .. }| {
                        format!(
                            "{} {} {}",
                            format_rational(prob),
                            g.states[*state],
                            g.signals_1[*c]
                        )
                    })
                    .collect();
                if !outs.is_empty() {
                    let _ = writeln!(
                        out,
                        "{} {} {} -> {}",
                        g.states[k],
                        g.actions_1[i],
                        g.actions_2[j],
                        outs.join(", ")
                    );
                }
            }
        }
    }
    out.push_str("\n[pi]\n");
    let _ = writeln!(out, "C = {}", g.prior.signals_1.join(", "));
    let _ = writeln!(out, "D = {}", g.prior.signals_2.join(", "));
    for ((k, c, d), p) in &g.prior.mass {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            format_rational(p),
            g.states[*k],
            g.prior.c_label(*c),
            g.prior.d_label(*d)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{signal_2x2, symmetric_2};

    #[test]
    fn round_trip_bundled_games() {
        for g in [signal_2x2(), symmetric_2()] {
            let text = save(&g);
            let back = load(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(save(&back), text);
        }
    }

    #[test]
    fn builtin_line() {
        assert_eq!(
            load("# bundled\nbuiltin symmetric_2\n").unwrap(),
            symmetric_2()
        );
        assert!(load("builtin nope").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text =
            save(&signal_2x2()).replace("lo wait pass -> 1/2 lo", "lo wait pass -> 1/2 nowhere");
        let line = text.lines().position(|l| l.contains("nowhere")).unwrap() + 1;
        assert_eq!(
            load(&text).unwrap_err(),
            SignalError::Parse {
                line,
                message: "unknown state `nowhere`".into()
            }
        );
    }

    #[test]
    fn invalid_games_are_rejected() {
        // Breaking the probabilities of one transition.
        let text = save(&signal_2x2());
        let bad = text.replacen("1/2 lo wait.pass.lo?", "1/3 lo wait.pass.lo?", 1);
        assert_ne!(bad, text);
        assert!(matches!(load(&bad), Err(SignalError::Invalid(_))));
    }
}
