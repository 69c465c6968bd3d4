use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::detectors::{priority_label, Finding};

use super::{Report, ReportError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Xml,
    Txt,
    Csv,
    Html,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s.to_ascii_lowercase().as_str() {
            "xml" => Ok(Format::Xml),
            "txt" | "text" => Ok(Format::Txt),
            "csv" => Ok(Format::Csv),
            "html" => Ok(Format::Html),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Short bug-pattern code: the prefix of an upper-case id, else the id.
fn pattern(rule_id: &str) -> &str {
    if rule_id
        .chars()
        .all(|c| c.is_ascii_uppercase() || c == '_' || c.is_ascii_digit())
    {
        rule_id.split('_').next().unwrap_or(rule_id)
    } else {
        rule_id
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn timestamp(r: &Report) -> String {
    r.generated_at.format("%Y-%m-%dT%H:%M:%S").to_string()
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Xml => xml(report),
        Format::Txt => txt(report),
        Format::Csv => csv_doc(report),
        Format::Html => html(report),
    }
}

/// Renders `report` and writes it to `out`; returns the document.
pub fn emit_report(report: &Report, format: Format, out: &Path) -> Result<String, ReportError> {
    let doc = render(report, format);
    std::fs::write(out, &doc)?;
    Ok(doc)
}

fn xml(r: &Report) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<BugCollection tool=\"overrun-lint\" version=\"{}\" timestamp=\"{}\">",
        escape(&r.tool_version),
        timestamp(r)
    );
    for (i, f) in r.findings.iter().enumerate() {
        let _ = writeln!(
            s,
            "  <BugInstance markerId=\"{}\" BUGTYPE=\"{}\" PATTERN=\"{}\" category=\"{}\" priority=\"{}\" \
             RANK=\"{}\" rankBand=\"{}\" confidence=\"{}\" sourceFile=\"{}\" lineNumber=\"{}\" column=\"{}\" \
             message=\"{}\"/>",
            i + 1,
            escape(&f.rule_id),
            escape(pattern(&f.rule_id)),
            f.category.as_str(),
            f.priority,
            f.rank,
            f.rank_band.as_str(),
            f.confidence.as_str(),
            escape(f.span.file.as_str()),
            f.span.line,
            f.span.column,
            escape(&f.message)
        );
    }
    for b in &r.bound_findings {
        let _ = writeln!(
            s,
            "  <BoundFinding kind=\"{}\" array=\"{}\" sourceFile=\"{}\" lineNumber=\"{}\" column=\"{}\" detail=\"{}\"/>",
            b.kind,
            escape(&b.array_name),
            escape(b.span.file.as_str()),
            b.span.line,
            b.span.column,
            escape(&b.detail)
        );
    }
    if !r.coverage.is_empty() {
        s.push_str("  <Coverage>\n");
        for c in &r.coverage {
            let _ = writeln!(
                s,
                "    <Counter type=\"{}\" covered=\"{}\" missed=\"{}\"/>",
                c.kind.as_str(),
                c.covered,
                c.missed
            );
        }
        s.push_str("  </Coverage>\n");
    }
    if !r.metrics.rows.is_empty() {
        s.push_str("  <Complexity>\n");
        for row in &r.metrics.rows {
            let pct = row.coverage_pct.map_or_else(String::new, |p| format!("{p:.1}"));
            let _ = writeln!(
                s,
                "    <Element level=\"{}\" name=\"{}\" coverage=\"{}\" covered=\"{}\" missed=\"{}\" total=\"{}\"/>",
                row.level.as_str(),
                escape(&row.element),
                pct,
                row.covered_complexity,
                row.missed_complexity,
                row.total_complexity()
            );
        }
        s.push_str("  </Complexity>\n");
    }
    s.push_str("  <Summary>\n");
    for (cat, n) in &r.category_summary {
        let _ = writeln!(s, "    <CategoryCount category=\"{}\" count=\"{}\"/>", cat.as_str(), n);
    }
    s.push_str("  </Summary>\n</BugCollection>\n");
    s
}

fn txt_line(f: &Finding) -> String {
    format!(
        "{}:{}:{}: [{}] {} {} ({}) rank {} ({}) confidence {}: {}",
        f.span.file.as_str(),
        f.span.line,
        f.span.column,
        f.rule_id,
        f.category.as_str(),
        priority_label(f.priority),
        f.priority_color.as_str(),
        f.rank,
        f.rank_band.as_str(),
        f.confidence.as_str(),
        f.message
    )
}

fn txt(r: &Report) -> String {
    let mut s = format!("overrun-lint {} report, {}\n", r.tool_version, timestamp(r));
    for f in &r.findings {
        s.push_str(&txt_line(f));
        s.push('\n');
    }
    if !r.bound_findings.is_empty() {
        s.push_str("\nBound check:\n");
        for b in &r.bound_findings {
            let _ = writeln!(
                s,
                "{}:{}:{}: {} on `{}`: {}",
                b.span.file.as_str(),
                b.span.line,
                b.span.column,
                b.kind,
                b.array_name,
                b.detail
            );
        }
    }
    if !r.coverage.is_empty() {
        s.push_str("\nCoverage:\n");
        for c in &r.coverage {
            let pct = super::coverage_percent(c.covered, c.missed)
                .map_or_else(|_| "n/a".to_string(), |p| format!("{p:.1} %"));
            let _ = writeln!(
                s,
                "  {:<12} {:>4} covered {:>4} missed  {}",
                c.kind.as_str(),
                c.covered,
                c.missed,
                pct
            );
        }
    }
    if !r.metrics.rows.is_empty() {
        s.push_str("\nComplexity:\n");
        s.push_str(&r.metrics.to_table());
    }
    let _ = writeln!(s, "\nSummary: {} finding(s)", r.findings.len());
    for (cat, n) in &r.category_summary {
        let _ = writeln!(s, "  {}: {}", cat.as_str(), n);
    }
    s
}

pub(super) const CSV_HEADER: [&str; 8] = [
    "file",
    "line",
    "rule_id",
    "category",
    "priority",
    "rank",
    "confidence",
    "message",
];

fn csv_doc(r: &Report) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("write to memory");
    for f in &r.findings {
        w.write_record([
            f.span.file.as_str(),
            &f.span.line.to_string(),
            &f.rule_id,
            f.category.as_str(),
            &f.priority.to_string(),
            &f.rank.to_string(),
            f.confidence.as_str(),
            &f.message,
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

fn html(r: &Report) -> String {
    let mut s = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>overrun-lint report</title>\n<style>\n\
         .red{background:#f4a6a6}.orange{background:#f8c98a}.yellow{background:#fbef9a}\
         .green{background:#b8e6b0}.blue{background:#b3cdf2}\n\
         td,th{padding:2px 8px;text-align:left}\n</style>\n</head>\n<body>\n",
    );
    let _ = writeln!(
        s,
        "<h1>overrun-lint {}</h1>\n<p>Generated {}</p>",
        escape(&r.tool_version),
        timestamp(r)
    );
    s.push_str("<h2>Findings</h2>\n<table>\n<tr><th>File</th><th>Line</th><th>Rule</th><th>Category</th><th>Priority</th><th>Rank</th><th>Confidence</th><th>Message</th></tr>\n");
    for f in &r.findings {
        let _ = writeln!(
            s,
            "<tr class=\"{}\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{} {}</td><td>{} ({})</td><td>{}</td><td>{}</td></tr>",
            f.priority_color.as_str(),
            escape(f.span.file.as_str()),
            f.span.line,
            escape(&f.rule_id),
            f.category.as_str(),
            f.priority,
            priority_label(f.priority),
            f.rank,
            f.rank_band.as_str(),
            f.confidence.as_str(),
            escape(&f.message)
        );
    }
    s.push_str("</table>\n");
    if !r.bound_findings.is_empty() {
        s.push_str("<h2>Bound check</h2>\n<table>\n<tr><th>File</th><th>Line</th><th>Kind</th><th>Array</th><th>Detail</th></tr>\n");
        for b in &r.bound_findings {
            let _ = writeln!(
                s,
                "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                escape(b.span.file.as_str()),
                b.span.line,
                b.kind,
                escape(&b.array_name),
                escape(&b.detail)
            );
        }
        s.push_str("</table>\n");
    }
    if !r.coverage.is_empty() {
        s.push_str("<h2>Coverage</h2>\n<table>\n<tr><th>Counter</th><th>Covered</th><th>Missed</th></tr>\n");
        for c in &r.coverage {
            let _ = writeln!(
                s,
                "<tr><td>{}</td><td>{}</td><td>{}</td></tr>",
                c.kind.as_str(),
                c.covered,
                c.missed
            );
        }
        s.push_str("</table>\n");
        for fc in &r.line_coverage {
            let _ = writeln!(s, "<h3>{}</h3>\n<table>", escape(&fc.file));
            for (line, status) in &fc.lines {
                let _ = writeln!(s, "<tr class=\"{}\"><td>{}</td></tr>", status.color(), line);
            }
            s.push_str("</table>\n");
        }
    }
    if !r.metrics.rows.is_empty() {
        s.push_str("<h2>Complexity</h2>\n<table>\n<tr><th>Element</th><th>Coverage</th><th>Covered</th><th>Missed</th><th>Total</th></tr>\n");
        for row in &r.metrics.rows {
            let pct = row
                .coverage_pct
                .map_or_else(|| "n/a".to_string(), |p| format!("{p:.1} %"));
            let _ = writeln!(
                s,
                "<tr class=\"level-{}\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                row.level.as_str(),
                escape(&row.element),
                pct,
                row.covered_complexity,
                row.missed_complexity,
                row.total_complexity()
            );
        }
        s.push_str("</table>\n");
    }
    s.push_str("<h2>Summary</h2>\n<ul>\n");
    for (cat, n) in &r.category_summary {
        let _ = writeln!(s, "<li>{}: {}</li>", cat.as_str(), n);
    }
    s.push_str("</ul>\n</body>\n</html>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{analyze_unit, RuleSet};
    use crate::frontend::parse_source;
    use chrono::NaiveDate;

    fn report() -> Report {
        let u = parse_source(
            "class A { void m() { String s = readLine(); println(s.trim()); int q; } }",
            "a.sl",
        )
        .unwrap();
        let when = NaiveDate::from_ymd_opt(2012, 3, 28)
            .unwrap()
            .and_hms_opt(12, 4, 0)
            .unwrap();
        Report::new(analyze_unit(&u, &RuleSet::default()), when)
    }

    #[test]
    fn every_format_is_deterministic() {
        let r = report();
        for f in [Format::Xml, Format::Txt, Format::Csv, Format::Html] {
            assert_eq!(render(&r, f), render(&r, f));
        }
    }

    #[test]
    fn xml_carries_bug_fields() {
        let doc = render(&report(), Format::Xml);
        assert!(doc.contains("BUGTYPE=\"NP_DEREFERENCE_OF_READLINE_VALUE\""));
        assert!(doc.contains("PATTERN=\"NP\""));
        assert!(doc.contains("RANK=\"15\""));
        assert!(doc.contains("lineNumber=\"1\""));
        assert!(doc.contains("timestamp=\"2012-03-28T12:04:00\""));
    }

    #[test]
    fn csv_has_header_and_one_row_per_finding() {
        let r = report();
        let doc = render(&r, Format::Csv);
        let mut rd = csv::Reader::from_reader(doc.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
        assert_eq!(rd.records().count(), r.findings.len());
    }

    #[test]
    fn html_colors_by_priority() {
        let doc = render(&report(), Format::Html);
        assert!(doc.contains("<tr class=\"yellow\">"));
        assert!(doc.contains("MEDIUM PRIORITY"));
    }

    #[test]
    fn unknown_format_rejected() {
        assert!("pdf".parse::<Format>().is_err());
        assert_eq!("HTML".parse::<Format>().unwrap(), Format::Html);
    }

    #[test]
    fn emit_reports_io_errors() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("no/such/dir/r.xml");
        assert!(matches!(
            emit_report(&report(), Format::Xml, &missing),
            Err(ReportError::Io(_))
        ));
        let ok = dir.path().join("r.txt");
        let doc = emit_report(&report(), Format::Txt, &ok).unwrap();
        assert_eq!(std::fs::read_to_string(ok).unwrap(), doc);
    }
}
