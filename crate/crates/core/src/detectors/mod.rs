//! Rule engine: findings, rule catalog, rulesets and clone detection.

pub mod cpd;
mod rules;

use std::collections::BTreeMap;
use std::fmt;

use crate::cfg::{build_cfgs, ControlFlowGraph};
use crate::frontend::{CompilationUnit, SourceSpan};
use crate::semantics::{build_call_graph, build_symbol_table, CallGraph, SymbolTable};

pub use cpd::{find_duplicates, normalized_tokens, ClonePair, NormToken};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    MaliciousCode,
    Dodgy,
    BadPractice,
    Correctness,
    Internationalization,
    Performance,
    Security,
    MultithreadedCorrectness,
    Experimental,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::MaliciousCode,
        Category::Dodgy,
        Category::BadPractice,
        Category::Correctness,
        Category::Internationalization,
        Category::Performance,
        Category::Security,
        Category::MultithreadedCorrectness,
        Category::Experimental,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::MaliciousCode => "malicious_code",
            Category::Dodgy => "dodgy",
            Category::BadPractice => "bad_practice",
            Category::Correctness => "correctness",
            Category::Internationalization => "internationalization",
            Category::Performance => "performance",
            Category::Security => "security",
            Category::MultithreadedCorrectness => "multithreaded_correctness",
            Category::Experimental => "experimental",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PriorityColor {
    Red,
    Orange,
    Yellow,
    Green,
    Blue,
}

impl PriorityColor {
    pub fn of(priority: u8) -> PriorityColor {
        match priority {
            1 => PriorityColor::Red,
            2 => PriorityColor::Orange,
            3 => PriorityColor::Yellow,
            4 => PriorityColor::Green,
            _ => PriorityColor::Blue,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PriorityColor::Red => "red",
            PriorityColor::Orange => "orange",
            PriorityColor::Yellow => "yellow",
            PriorityColor::Green => "green",
            PriorityColor::Blue => "blue",
        }
    }
}

/// Display label for a 1–5 priority.
pub fn priority_label(priority: u8) -> &'static str {
    match priority {
        1 => "VERY HIGH PRIORITY",
        2 => "HIGH PRIORITY",
        3 => "MEDIUM PRIORITY",
        4 => "IGNORANT PRIORITY",
        _ => "NEGLIGIBLE",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RankBand {
    Scariest,
    Scary,
    Troubling,
    OfConcern,
}

impl RankBand {
    pub fn of(rank: u8) -> RankBand {
        match rank {
            0..=4 => RankBand::Scariest,
            5..=9 => RankBand::Scary,
            10..=14 => RankBand::Troubling,
            _ => RankBand::OfConcern,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RankBand::Scariest => "scariest",
            RankBand::Scary => "scary",
            RankBand::Troubling => "troubling",
            RankBand::OfConcern => "of_concern",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Confidence {
    High,
    Normal,
    Low,
}

impl Confidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::High => "high",
            Confidence::Normal => "normal",
            Confidence::Low => "low",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Triage {
    RelevantTruePositive,
    IrrelevantPositive,
    FalsePositive,
    #[default]
    Untriaged,
}

impl Triage {
    pub fn as_str(self) -> &'static str {
        match self {
            Triage::RelevantTruePositive => "relevant_true_positive",
            Triage::IrrelevantPositive => "irrelevant_positive",
            Triage::FalsePositive => "false_positive",
            Triage::Untriaged => "untriaged",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub rule_id: String,
    pub category: Category,
    pub priority: u8,
    pub priority_color: PriorityColor,
    pub rank: u8,
    pub rank_band: RankBand,
    pub confidence: Confidence,
    pub message: String,
    pub span: SourceSpan,
    pub triage: Triage,
}

/// Everything a detector may look at.
pub struct RuleContext<'a> {
    pub unit: &'a CompilationUnit,
    pub table: &'a SymbolTable,
    pub call_graph: &'a CallGraph,
    pub cfgs: &'a [ControlFlowGraph],
}

/// A raw detector hit before classification.
#[derive(Clone, Debug, PartialEq)]
pub struct Hit {
    pub span: SourceSpan,
    pub message: String,
}

impl Hit {
    pub fn new(span: &SourceSpan, message: impl Into<String>) -> Hit {
        Hit {
            span: span.clone(),
            message: message.into(),
        }
    }
}

pub struct Rule {
    pub id: &'static str,
    pub default_category: Category,
    pub default_priority: u8,
    pub default_confidence: Confidence,
    pub rank: u8,
    pub description: &'static str,
    pub detector: fn(&RuleContext) -> Vec<Hit>,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule").field("id", &self.id).finish_non_exhaustive()
    }
}

pub fn catalog() -> &'static [Rule] {
    rules::CATALOG
}

pub fn find_rule(id: &str) -> Option<&'static Rule> {
    rules::CATALOG.iter().find(|r| r.id == id)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleConfig {
    pub enabled: bool,
    pub priority_override: Option<u8>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            enabled: true,
            priority_override: None,
        }
    }
}

/// Per-rule settings; unlisted rules run at their defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RuleSet {
    pub entries: BTreeMap<String, RuleConfig>,
}

impl RuleSet {
    pub fn config(&self, rule_id: &str) -> RuleConfig {
        self.entries.get(rule_id).copied().unwrap_or_default()
    }

    pub fn is_enabled(&self, rule_id: &str) -> bool {
        self.config(rule_id).enabled
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("ruleset line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

/// Parses `rule <Id> [enabled=true|false] [priority=1-5]` lines; `#` starts
/// a comment.
pub fn load_ruleset(config: &str) -> Result<RuleSet, ConfigError> {
    let mut set = RuleSet::default();
    for (i, raw) in config.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| ConfigError { line: line_no, message };
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut words = text.split_whitespace();
        if words.next() != Some("rule") {
            return Err(err(format!("expected `rule`, found `{text}`")));
        }
        let id = words.next().ok_or_else(|| err("missing rule id".into()))?;
        if find_rule(id).is_none() {
            return Err(err(format!("unknown rule `{id}`")));
        }
        let mut cfg = RuleConfig::default();
        for opt in words {
            match opt.split_once('=') {
                Some(("enabled", "true")) => cfg.enabled = true,
                Some(("enabled", "false")) => cfg.enabled = false,
                Some(("priority", p)) => match p.parse::<u8>() {
                    Ok(p @ 1..=5) => cfg.priority_override = Some(p),
                    _ => return Err(err(format!("priority `{p}` outside 1-5"))),
                },
                _ => return Err(err(format!("unrecognized option `{opt}`"))),
            }
        }
        set.entries.insert(id.to_string(), cfg);
    }
    Ok(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub category: Category,
    pub priority: u8,
    pub priority_color: PriorityColor,
    pub rank: u8,
    pub rank_band: RankBand,
    pub confidence: Confidence,
}

pub fn classify(rule_id: &str, ruleset: &RuleSet) -> Result<Classification, UnknownRule> {
    let rule = find_rule(rule_id).ok_or_else(|| UnknownRule(rule_id.to_string()))?;
    let priority = ruleset
        .config(rule_id)
        .priority_override
        .unwrap_or(rule.default_priority);
    Ok(Classification {
        category: rule.default_category,
        priority,
        priority_color: PriorityColor::of(priority),
        rank: rule.rank,
        rank_band: RankBand::of(rule.rank),
        confidence: rule.default_confidence,
    })
}

fn sort_key(f: &Finding) -> (String, u32, String, u32) {
    (
        f.span.file.as_str().to_string(),
        f.span.line,
        f.rule_id.clone(),
        f.span.column,
    )
}

/// Runs every enabled rule; findings are sorted by file, line, rule id and
/// column.
pub fn run_rules(
    unit: &CompilationUnit,
    table: &SymbolTable,
    call_graph: &CallGraph,
    cfgs: &[ControlFlowGraph],
    ruleset: &RuleSet,
) -> Vec<Finding> {
    let ctx = RuleContext {
        unit,
        table,
        call_graph,
        cfgs,
    };
    let mut out = Vec::new();
    for rule in rules::CATALOG {
        if !ruleset.is_enabled(rule.id) {
            continue;
        }
        let c = classify(rule.id, ruleset).expect("catalog rule");
        for hit in (rule.detector)(&ctx) {
            out.push(Finding {
                rule_id: rule.id.to_string(),
                category: c.category,
                priority: c.priority,
                priority_color: c.priority_color,
                rank: c.rank,
                rank_band: c.rank_band,
                confidence: c.confidence,
                message: hit.message,
                span: hit.span,
                triage: Triage::Untriaged,
            });
        }
    }
    out.sort_by_cached_key(sort_key);
    out
}

/// Builds the symbol table, call graph and CFGs, then runs the rules.
pub fn analyze_unit(unit: &CompilationUnit, ruleset: &RuleSet) -> Vec<Finding> {
    let table = build_symbol_table(unit);
    let graph = build_call_graph(unit, &table);
    let cfgs = build_cfgs(unit);
    run_rules(unit, &table, &graph, &cfgs, ruleset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn count(findings: &[Finding], rule: &str) -> usize {
        findings.iter().filter(|f| f.rule_id == rule).count()
    }

    #[test]
    fn priority_colors_and_bands() {
        let colors: Vec<_> = (1..=5).map(|p| PriorityColor::of(p).as_str()).collect();
        assert_eq!(colors, ["red", "orange", "yellow", "green", "blue"]);
        assert_eq!(priority_label(1), "VERY HIGH PRIORITY");
        assert_eq!(RankBand::of(4), RankBand::Scariest);
        assert_eq!(RankBand::of(5), RankBand::Scary);
        assert_eq!(RankBand::of(14), RankBand::Troubling);
        assert_eq!(RankBand::of(15), RankBand::OfConcern);
        assert_eq!(RankBand::of(20), RankBand::OfConcern);
    }

    #[test]
    fn classify_known_and_unknown() {
        let set = RuleSet::default();
        let c = classify("NP_DEREFERENCE_OF_READLINE_VALUE", &set).unwrap();
        assert_eq!(c.category, Category::Dodgy);
        assert_eq!(c.confidence, Confidence::Normal);
        assert_eq!((c.rank, c.rank_band), (15, RankBand::OfConcern));
        let c = classify("InfiniteRecursion", &set).unwrap();
        assert_eq!((c.priority, c.priority_color), (1, PriorityColor::Red));
        assert_eq!(classify("Nope", &set), Err(UnknownRule("Nope".into())));
    }

    #[test]
    fn ruleset_parsing() {
        assert_eq!(load_ruleset("").unwrap(), RuleSet::default());
        let set =
            load_ruleset("# header\nrule SystemPrintln enabled=false\n\nrule NoPackage priority=2 # tail\n").unwrap();
        assert!(!set.is_enabled("SystemPrintln"));
        assert!(set.is_enabled("EmptyBlock"));
        assert_eq!(set.config("NoPackage").priority_override, Some(2));
        let e = load_ruleset("rule SystemPrintln\nrule Nonexistent priority=2").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(load_ruleset("rule NoPackage priority=6").unwrap_err().line, 1);
        assert!(load_ruleset("rule NoPackage color=red").is_err());
        assert!(load_ruleset("enable NoPackage").is_err());
    }

    #[test]
    fn catalog_ids_are_unique() {
        let mut ids: Vec<_> = catalog().iter().map(|r| r.id).collect();
        let n = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), n);
        assert_eq!(n, 21);
        for r in catalog() {
            assert!((1..=5).contains(&r.default_priority), "{}", r.id);
            assert!((1..=20).contains(&r.rank), "{}", r.id);
        }
    }

    #[test]
    fn priority_override_and_disable() {
        let u = parse_source("class A { void m() { println(1); } }", "a.sl").unwrap();
        let all = analyze_unit(&u, &RuleSet::default());
        assert_eq!(count(&all, "SystemPrintln"), 1);
        let set = load_ruleset("rule SystemPrintln priority=1").unwrap();
        let f = analyze_unit(&u, &set);
        let p = f.iter().find(|f| f.rule_id == "SystemPrintln").unwrap();
        assert_eq!((p.priority, p.priority_color), (1, PriorityColor::Red));
        let set = load_ruleset("rule SystemPrintln enabled=false").unwrap();
        let f = analyze_unit(&u, &set);
        assert_eq!(f.len(), all.len() - 1);
    }

    #[test]
    fn packaged_empty_class_is_clean() {
        let u = parse_source("package a.b;\nclass Empty { }", "e.sl").unwrap();
        assert!(analyze_unit(&u, &RuleSet::default()).is_empty());
    }

    #[test]
    fn findings_are_sorted() {
        let u = parse_source("class a_b { void X_y(int Q_q) { int unused; println(1); } }", "s.sl").unwrap();
        let f = analyze_unit(&u, &RuleSet::default());
        let keys: Vec<_> = f.iter().map(sort_key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(f.iter().all(|f| f.triage == Triage::Untriaged));
    }
}
