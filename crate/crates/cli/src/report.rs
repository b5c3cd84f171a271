//! Reports: titled text sections followed by a flat check table.

use std::fmt::Write;

use recgame_core::simulate::CheckRow;

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub title: String,
    /// `key: value` lines under the title.
    pub facts: Vec<(String, String)>,
    pub sections: Vec<Section>,
    pub checks: Vec<CheckRow>,
}

#[derive(Clone, Debug, Default)]
pub struct Section {
    pub heading: String,
    pub lines: Vec<String>,
}

pub const TABLE_HEADER: &str = "check\tbound\testimate\thalf_width\tstatus";

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn fact(&mut self, key: impl Into<String>, value: impl ToString) {
        self.facts.push((key.into(), value.to_string()));
    }

    /// Starts a section; later `line` calls append to it.
    pub fn section(&mut self, heading: impl Into<String>) {
        self.sections.push(Section {
            heading: heading.into(),
            lines: Vec::new(),
        });
    }

    pub fn line(&mut self, line: impl Into<String>) {
        if self.sections.is_empty() {
            self.section("");
        }
        self.sections.last_mut().unwrap().lines.push(line.into());
    }

    pub fn check(&mut self, row: CheckRow) {
        self.checks.push(row);
    }

    /// A check passing when `estimate ≤ bound`.
    pub fn at_most(&mut self, name: impl Into<String>, estimate: f64, bound: f64) {
        let pass = estimate <= bound;
        self.check(CheckRow {
            name: name.into(),
            bound,
            estimate,
            half_width: 0.0,
            pass,
        });
    }

    /// A check passing when `estimate ≥ bound`.
    pub fn at_least(&mut self, name: impl Into<String>, estimate: f64, bound: f64) {
        let pass = estimate >= bound;
        self.check(CheckRow {
            name: name.into(),
            bound,
            estimate,
            half_width: 0.0,
            pass,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for (k, v) in &self.facts {
            let _ = writeln!(out, "{k}: {v}");
        }
        for s in &self.sections {
            out.push('\n');
            if !s.heading.is_empty() {
                let _ = writeln!(out, "## {}", s.heading);
            }
            for l in &s.lines {
                out.push_str(l);
                out.push('\n');
            }
        }
        if !self.checks.is_empty() {
            out.push_str("\n## checks\n");
            out.push_str(&self.table());
        }
        if self.checks.is_empty() {
            out.push_str("\nresult: no checks\n");
        } else {
            let _ = writeln!(
                out,
                "\nresult: {} ({} of {} checks passed)",
                if self.passed() { "pass" } else { "FAIL" },
                self.checks.len() - self.failures(),
                self.checks.len()
            );
        }
        out
    }

    /// The check rows as a tab-separated table with a header.
    pub fn table(&self) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        for c in &self.checks {
            let _ = writeln!(out, "{c}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_passes() {
        let r = Report::new("nothing");
        assert!(r.passed());
        assert!(r.render().ends_with("result: no checks\n"));
    }

    #[test]
    fn one_failure_fails_the_report() {
        let mut r = Report::new("t");
        r.fact("game", "g");
        r.line("loose line");
        r.at_most("small", 0.5, 1.0);
        r.at_least("large", 0.5, 1.0);
        assert!(!r.passed());
        let text = r.render();
        assert!(text.contains("game: g\n"));
        assert!(text.contains("loose line\n"));
        assert!(text.contains("large\t1.000000\t0.500000\t0.000000\tFAIL"));
        assert_eq!(r.table().lines().count(), 3);
    }
}
