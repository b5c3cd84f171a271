//! Text format for games.
//!
//! ```text
//! # comment
//! game quitting_simple
//! payoff_bound 1
//!
//! [states]
//! active: s
//! win = 1
//! lose = -1
//!
//! [actions]
//! s: A = continue,quit; B = pass,block
//!
//! [transitions]
//! s continue pass -> 1/2 win, 1/2 s
//! ```
//!
//! A transition line may start with a `q` marker, and the player 2 action may
//! be omitted where player 2 has a single action. A generated game is a single
//! line `builtin <name> key=value ...`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed};

use crate::builtin::builtin;
use crate::game::{Diagnostic, Game, RecursiveGame};
use crate::state::{format_rational, parse_rational, Rational, StateId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("game failed validation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    States,
    Actions,
    Transitions,
}

struct Cursor<'a> {
    line_no: usize,
    raw: &'a str,
}

impl Cursor<'_> {
    fn err_at(&self, token: &str, message: impl Into<String>) -> FormatError {
        // Column of the token inside the raw line when it is a sub-slice, else 1.
        let base = self.raw.as_ptr() as usize;
        let ptr = token.as_ptr() as usize;
        let column = if ptr >= base && ptr <= base + self.raw.len() {
            self.raw[..ptr - base].chars().count() + 1
        } else {
            1
        };
        FormatError::Parse {
            line: self.line_no,
            column,
            message: message.into(),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Splits on commas that are not inside parentheses, keeping sub-slices.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_state<'a>(cur: &Cursor<'a>, tok: &'a str) -> Result<StateId, FormatError> {
    tok.trim()
        .parse()
        .map_err(|_| cur.err_at(tok.trim(), format!("invalid state `{}`", tok.trim())))
}

fn action_list<'a>(cur: &Cursor<'a>, s: &'a str) -> Result<Vec<String>, FormatError> {
    let names: Vec<String> = s.split(',').map(|a| a.trim().to_string()).collect();
    if names
        .iter()
        .any(|a| a.is_empty() || a.contains(char::is_whitespace))
    {
        return Err(cur.err_at(s, "malformed action list"));
    }
    Ok(names)
}

/// Parses a game description and validates it.
pub fn load(text: &str) -> Result<Game, FormatError> {
    let mut section = Section::Header;
    let mut game = RecursiveGame::new("unnamed");
    let mut generated: Option<Game> = None;
    let mut saw_states = false;

    for (idx, raw) in text.lines().enumerate() {
        let cur = Cursor {
            line_no: idx + 1,
            raw,
        };
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if generated.is_some() {
            return Err(cur.err_at(line, "nothing may follow a builtin declaration"));
        }
        if line.starts_with('[') {
            section = match line {
                "[states]" => {
                    saw_states = true;
                    Section::States
                }
                "[actions]" => Section::Actions,
                "[transitions]" => Section::Transitions,
                _ => return Err(cur.err_at(line, format!("unknown section {line}"))),
            };
            continue;
        }
        match section {
            Section::Header => {
                let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
                let rest = rest.trim();
                match key {
                    "game" if !rest.is_empty() => game.name = rest.to_string(),
                    "payoff_bound" => {
                        let b = parse_rational(rest)
                            .filter(|b| b.is_positive())
                            .ok_or_else(|| {
                                cur.err_at(rest, "payoff_bound must be a positive rational")
                            })?;
                        game.payoff_bound = b;
                    }
                    "builtin" => {
                        let mut words = rest.split_whitespace();
                        let name = words
                            .next()
                            .ok_or_else(|| cur.err_at(line, "builtin needs a name"))?;
                        let mut params = BTreeMap::new();
                        for w in words {
                            let (k, v) = w
                                .split_once('=')
                                .ok_or_else(|| cur.err_at(w, "expected key=value"))?;
                            params.insert(k.to_string(), v.to_string());
                        }
                        generated = Some(builtin(name, &params).map_err(|m| cur.err_at(name, m))?);
                    }
                    _ => return Err(cur.err_at(line, format!("unexpected header line `{line}`"))),
                }
            }
            Section::States => {
                if let Some(list) = line.strip_prefix("active") {
                    let list = list.trim_start();
                    let list = list
                        .strip_prefix(':')
                        .ok_or_else(|| cur.err_at(list, "expected `active: s1, s2, ...`"))?;
                    for tok in split_top_level(list) {
                        if tok.trim().is_empty() {
                            continue;
                        }
                        let x = parse_state(&cur, tok)?;
                        if game.active.contains(&x) || game.absorbing.contains_key(&x) {
                            return Err(cur.err_at(tok.trim(), format!("state {x} declared twice")));
                        }
                        game.active.insert(x);
                    }
                } else {
                    let (name, payoff) = line
                        .split_once('=')
                        .ok_or_else(|| cur.err_at(line, "expected `state = payoff`"))?;
                    let x = parse_state(&cur, name)?;
                    let payoff_tok = payoff.trim();
                    let g = parse_rational(payoff_tok).ok_or_else(|| {
                        cur.err_at(payoff_tok, format!("invalid payoff `{payoff_tok}`"))
                    })?;
                    if game.active.contains(&x) || game.absorbing.contains_key(&x) {
                        return Err(cur.err_at(name.trim(), format!("state {x} declared twice")));
                    }
                    game.absorbing.insert(x, g);
                }
            }
            Section::Actions => {
                let (state, rest) = line
                    .rsplit_once(": A")
                    .ok_or_else(|| cur.err_at(line, "expected `state: A = a1,a2; B = b1,b2`"))?;
                let x = parse_state(&cur, state)?;
                let rest = rest.trim_start();
                let rest = rest
                    .strip_prefix('=')
                    .ok_or_else(|| cur.err_at(rest, "expected `A =`"))?;
                let (a_part, b_part) = rest
                    .split_once(';')
                    .ok_or_else(|| cur.err_at(rest, "expected `; B = ...`"))?;
                let b_part = b_part.trim_start();
                let b_list = b_part
                    .strip_prefix('B')
                    .and_then(|r| r.trim_start().strip_prefix('='))
                    .ok_or_else(|| cur.err_at(b_part, "expected `B =`"))?;
                if game.actions_a.contains_key(&x) {
                    return Err(cur.err_at(state.trim(), format!("actions for {x} declared twice")));
                }
                game.actions_a.insert(x.clone(), action_list(&cur, a_part)?);
                game.actions_b.insert(x, action_list(&cur, b_list)?);
            }
            Section::Transitions => {
                let (lhs, rhs) = line
                    .split_once("->")
                    .ok_or_else(|| cur.err_at(line, "expected `state a b -> p state, ...`"))?;
                let mut toks: Vec<&str> = lhs.split_whitespace().collect();
                if toks.first() == Some(&"q") && toks.len() >= 3 {
                    toks.remove(0);
                }
                if toks.len() < 2 || toks.len() > 3 {
                    return Err(cur.err_at(lhs, "expected `state a b` before `->`"));
                }
                let x = parse_state(&cur, toks[0])?;
                let (Some(alist), Some(blist)) = (game.actions_a.get(&x), game.actions_b.get(&x))
                else {
                    return Err(cur.err_at(toks[0], format!("no actions declared for {x}")));
                };
                let a = alist.iter().position(|n| n == toks[1]).ok_or_else(|| {
                    cur.err_at(toks[1], format!("unknown action `{}` at {x}", toks[1]))
                })?;
                let b = if toks.len() == 3 {
                    blist.iter().position(|n| n == toks[2]).ok_or_else(|| {
                        cur.err_at(toks[2], format!("unknown action `{}` at {x}", toks[2]))
                    })?
                } else if blist.len() == 1 {
                    0
                } else {
                    return Err(cur.err_at(toks[1], "player 2 action required"));
                };
                let mut dist = Vec::new();
                for item in split_top_level(rhs) {
                    let item = item.trim();
                    let (p_tok, s_tok) = item
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| cur.err_at(item, "expected `probability state`"))?;
                    let p = parse_rational(p_tok).ok_or_else(|| {
                        cur.err_at(p_tok, format!("malformed probability `{p_tok}`"))
                    })?;
                    if p.is_negative() || p > Rational::one() {
                        return Err(cur.err_at(p_tok, format!("probability {p_tok} outside [0,1]")));
                    }
                    dist.push((parse_state(&cur, s_tok)?, p));
                }
                if game.transitions.insert((x.clone(), a, b), dist).is_some() {
                    return Err(cur.err_at(toks[0], format!("duplicate transition at {x}")));
                }
            }
        }
    }

    if let Some(g) = generated {
        let diags = g.validate();
        return if diags.is_empty() {
            Ok(g)
        } else {
            Err(FormatError::Invalid(diags))
        };
    }
    if !saw_states {
        return Err(FormatError::Parse {
            line: 1,
            column: 1,
            message: "missing [states] section".into(),
        });
    }
    let diags = game.validate();
    if diags.is_empty() {
        Ok(Game::Finite(game))
    } else {
        Err(FormatError::Invalid(diags))
    }
}

/// Canonical text of a game. States and transitions appear in sorted order.
pub fn save(game: &Game) -> String {
    let g = match game {
        Game::LehrerSorin(ls) => {
            return format!(
                "builtin lehrer_sorin bound={} penalty={}\n",
                ls.bound, ls.penalty
            );
        }
        Game::Finite(g) => g,
    };
    let mut out = String::new();
    let _ = writeln!(out, "game {}", g.name);
    if !g.payoff_bound.is_one() {
        let _ = writeln!(out, "payoff_bound {}", format_rational(&g.payoff_bound));
    }
    out.push_str("\n[states]\n");
    let active: Vec<String> = g.active.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "active: {}", active.join(", "));
    for (x, p) in &g.absorbing {
        let _ = writeln!(out, "{x} = {}", format_rational(p));
    }
    out.push_str("\n[actions]\n");
    for x in &g.active {
        let a = g.actions_a.get(x).cloned().unwrap_or_default().join(",");
        let b = g.actions_b.get(x).cloned().unwrap_or_default().join(",");
        let _ = writeln!(out, "{x}: A = {a}; B = {b}");
    }
    out.push_str("\n[transitions]\n");
    for ((x, a, b), dist) in &g.transitions {
        let an = &g.actions_a[x][*a];
        let bn = &g.actions_b[x][*b];
        let rhs: Vec<String> = dist
            .iter()
            .map(|(t, p)| format!("{} {t}", format_rational(p)))
            .collect();
        let _ = writeln!(out, "{x} {an} {bn} -> {}", rhs.join(", "));
    }
    out
}
