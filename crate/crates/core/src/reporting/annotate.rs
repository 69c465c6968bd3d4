//! `//@PMD:REVIEWED:` comments that mark a finding as reviewed.

use chrono::NaiveDateTime;

use super::ReportError;

pub const REVIEW_MARKER: &str = "//@PMD:REVIEWED:";

const TIME_FORMAT: &str = "%-m/%-d/%y %-I.%M%p";

pub fn format_review_time(t: NaiveDateTime) -> String {
    t.format(TIME_FORMAT).to_string()
}

pub fn parse_review_time(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s.trim(), "%m/%d/%y %I.%M%p").ok()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReviewAnnotation {
    pub rule_id: String,
    pub reviewer: String,
    pub time: NaiveDateTime,
}

impl ReviewAnnotation {
    pub fn render(&self) -> String {
        format!(
            "{REVIEW_MARKER} {}: by {} on {}",
            self.rule_id,
            self.reviewer,
            format_review_time(self.time)
        )
    }

    /// Reads an annotation back from a line containing one.
    pub fn parse(line: &str) -> Option<ReviewAnnotation> {
        let rest = &line[line.find(REVIEW_MARKER)? + REVIEW_MARKER.len()..];
        let (rule, rest) = rest.trim_start().split_once(": by ")?;
        let (reviewer, time) = rest.rsplit_once(" on ")?;
        Some(ReviewAnnotation {
            rule_id: rule.trim().to_string(),
            reviewer: reviewer.trim().to_string(),
            time: parse_review_time(time)?,
        })
    }
}

fn names_rule(line: &str, rule_id: &str) -> bool {
    line.find(REVIEW_MARKER).is_some_and(|at| {
        let rest = line[at + REVIEW_MARKER.len()..].trim_start();
        rest.strip_prefix(rule_id).is_some_and(|r| r.starts_with(':'))
    })
}

/// Whether the 1-based `line` carries, or sits directly under a run of
/// review comments that includes, an annotation for `rule_id`.
pub fn is_reviewed(source: &str, line: u32, rule_id: &str) -> bool {
    let lines: Vec<&str> = source.lines().collect();
    let Some(idx) = (line as usize).checked_sub(1).filter(|&i| i < lines.len()) else {
        return false;
    };
    if names_rule(lines[idx], rule_id) {
        return true;
    }
    lines[..idx]
        .iter()
        .rev()
        .take_while(|l| l.trim_start().starts_with(REVIEW_MARKER))
        .any(|l| names_rule(l, rule_id))
}

/// Inserts `annotation` above `line` with that line's indentation.
/// Annotating an already annotated line returns the source unchanged.
pub fn annotate_source(source: &str, line: u32, annotation: &ReviewAnnotation) -> Result<String, ReportError> {
    let lines: Vec<&str> = source.split_inclusive('\n').collect();
    let idx = (line as usize)
        .checked_sub(1)
        .filter(|&i| i < lines.len())
        .ok_or(ReportError::SpanOutOfRange {
            line,
            lines: lines.len(),
        })?;
    if is_reviewed(source, line, &annotation.rule_id) {
        return Ok(source.to_string());
    }
    let target = lines[idx];
    let indent: String = target.chars().take_while(|c| *c == ' ' || *c == '\t').collect();
    let newline = if target.ends_with("\r\n") { "\r\n" } else { "\n" };
    let mut out = String::with_capacity(source.len() + 80);
    for (i, l) in lines.iter().enumerate() {
        if i == idx {
            out.push_str(&indent);
            out.push_str(&annotation.render());
            out.push_str(newline);
        }
        out.push_str(l);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ann(rule: &str) -> ReviewAnnotation {
        ReviewAnnotation {
            rule_id: rule.into(),
            reviewer: "MAK GAUR".into(),
            time: NaiveDate::from_ymd_opt(2012, 3, 28)
                .unwrap()
                .and_hms_opt(12, 4, 0)
                .unwrap(),
        }
    }

    #[test]
    fn renders_reviewed_comment() {
        assert_eq!(
            ann("MethodNamingConvention").render(),
            "//@PMD:REVIEWED: MethodNamingConvention: by MAK GAUR on 3/28/12 12.04PM"
        );
    }

    #[test]
    fn parse_round_trips() {
        let a = ann("SystemPrintln");
        assert_eq!(ReviewAnnotation::parse(&format!("    {}", a.render())), Some(a));
        assert_eq!(ReviewAnnotation::parse("// plain"), None);
    }

    #[test]
    fn inserts_with_indentation_and_is_idempotent() {
        let src = "class A {\n    void Foo() {}\n}\n";
        let once = annotate_source(src, 2, &ann("MethodNamingConvention")).unwrap();
        assert_eq!(
            once,
            "class A {\n    //@PMD:REVIEWED: MethodNamingConvention: by MAK GAUR on 3/28/12 12.04PM\n    void Foo() {}\n}\n"
        );
        // The original line has moved down by one.
        assert_eq!(annotate_source(&once, 3, &ann("MethodNamingConvention")).unwrap(), once);
        assert_eq!(annotate_source(&once, 2, &ann("MethodNamingConvention")).unwrap(), once);
        let twice = annotate_source(&once, 3, &ann("SystemPrintln")).unwrap();
        assert_eq!(twice.lines().count(), 5);
        assert!(is_reviewed(&twice, 4, "MethodNamingConvention"));
        assert!(is_reviewed(&twice, 4, "SystemPrintln"));
        assert!(!is_reviewed(&twice, 4, "EmptyBlock"));
    }

    #[test]
    fn rule_prefix_does_not_match() {
        let src = "//@PMD:REVIEWED: SystemPrintlnX: by a on 1/1/20 1.00AM\nx;\n";
        assert!(!is_reviewed(src, 2, "SystemPrintln"));
    }

    #[test]
    fn out_of_range_line() {
        let err = annotate_source("a\nb\n", 3, &ann("R")).unwrap_err();
        assert!(matches!(err, ReportError::SpanOutOfRange { line: 3, lines: 2 }));
        assert!(annotate_source("a\n", 0, &ann("R")).is_err());
    }
}
