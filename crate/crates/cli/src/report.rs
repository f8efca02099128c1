//! Markdown reports: a parameter table, a findings table and free sections.

use std::fmt::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub claim: String,
    pub holds: bool,
    pub detail: String,
}

impl Finding {
    pub fn new(claim: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Finding { claim: claim.into(), holds, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub title: String,
    pub parameters: Vec<(String, String)>,
    pub findings: Vec<Finding>,
    pub sections: Vec<(String, String)>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.push((key.into(), value.to_string()));
    }

    pub fn finding(&mut self, f: Finding) {
        self.findings.push(f);
    }

    pub fn section(&mut self, heading: &str, body: String) {
        self.sections.push((heading.into(), body));
    }

    pub fn holds(&self) -> usize {
        self.findings.iter().filter(|f| f.holds).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}\n", self.title);
        if !self.parameters.is_empty() {
            s.push_str("| parameter | value |\n|---|---|\n");
            for (k, v) in &self.parameters {
                let _ = writeln!(s, "| {k} | {} |", cell(v));
            }
            s.push('\n');
        }
        let _ = writeln!(s, "## Findings ({}/{} hold)\n", self.holds(), self.findings.len());
        s.push_str("| result | claim | detail |\n|---|---|---|\n");
        for f in &self.findings {
            let _ =
                writeln!(s, "| {} | {} | {} |", if f.holds { "PASS" } else { "FAIL" }, cell(&f.claim), cell(&f.detail));
        }
        for (heading, body) in &self.sections {
            let _ = write!(s, "\n## {heading}\n\n{}", body);
            if !body.ends_with('\n') {
                s.push('\n');
            }
        }
        s
    }

    /// One line per finding for stdout.
    pub fn summary(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .findings
            .iter()
            .map(|f| format!("[{}] {}: {}", if f.holds { "PASS" } else { "FAIL" }, f.claim, f.detail))
            .collect();
        lines.push(format!("findings: {}/{} hold", self.holds(), self.findings.len()));
        lines
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// Markdown table from a header and rows.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(s, "| {} |", r.iter().map(|c| cell(c)).collect::<Vec<_>>().join(" | "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_findings() {
        let mut r = Report::new("t");
        r.param("h", "1/32");
        r.finding(Finding::new("a", true, "x|y"));
        r.finding(Finding::new("b", false, ""));
        let md = r.render();
        assert!(md.contains("## Findings (1/2 hold)"));
        assert!(md.contains("| PASS | a | x\\|y |"));
        assert_eq!(r.summary().last().unwrap(), "findings: 1/2 hold");
    }
}
