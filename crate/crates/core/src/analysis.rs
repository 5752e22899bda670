//! Full decision pipeline for one pattern, aggregated into a report.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::construction::{self, RankVerdict};
use crate::graph::SparsityPattern;
use crate::necessary::{self, NecessaryVerdict};
use crate::structural::{self, StructuralVerdict};

/// Environment variable overriding the default size limit of the trap search.
pub const TRAP_LIMIT_ENV: &str = "STRUCTAVG_TRAP_LIMIT";

/// Seed of the random compliant pairs tried when the monomial construction is
/// refused or inconclusive.
pub const RANDOM_PAIR_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    FailsNecessary,
    PassesNecessary,
    Inconclusive,
    Refused,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    StructurallyAveragedControllable,
    NotStructurallyAveragedControllable,
    Undetermined,
}

impl Classification {
    /// 0 certified controllable, 1 certified not, 2 undetermined.
    pub fn exit_code(self) -> i32 {
        match self {
            Classification::StructurallyAveragedControllable => 0,
            Classification::NotStructurallyAveragedControllable => 1,
            Classification::Undetermined => 2,
        }
    }
}

/// Exit code for unreadable or malformed input.
pub const INPUT_ERROR_EXIT: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub name: String,
    /// What the test checks, in words.
    pub reference: String,
    pub verdict: Verdict,
    pub witness: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub pattern_digest: String,
    pub n: usize,
    pub m: usize,
    pub tests: Vec<TestRecord>,
    pub classification: Classification,
    /// Names of the tests that ended inconclusive.
    pub inconclusive: Vec<String>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn test(&self, name: &str) -> Option<&TestRecord> {
        self.tests.iter().find(|t| t.name == name)
    }

    /// Plain-text rendering, one line per test.
    pub fn render(&self) -> String {
        let mut out = format!("pattern {} (n = {}, m = {})\n", &self.pattern_digest[..16], self.n, self.m);
        for t in &self.tests {
            let verdict = serde_json::to_value(t.verdict).expect("unit enum");
            let timing = t.elapsed_ms.map(|ms| format!("  [{ms:.2} ms]")).unwrap_or_default();
            out.push_str(&format!("  {:<22} {:<17} {}{}\n", t.name, verdict.as_str().unwrap_or(""), t.reference, timing));
            if !t.witness.is_null() {
                out.push_str(&format!("  {:<22} witness: {}\n", "", summarize(&t.witness)));
            }
        }
        let class = serde_json::to_value(self.classification).expect("unit enum");
        out.push_str(&format!("overall: {}\n", class.as_str().unwrap_or("")));
        if !self.inconclusive.is_empty() {
            out.push_str(&format!("inconclusive: {}\n", self.inconclusive.join(", ")));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

fn summarize(v: &Value) -> String {
    let s = v.to_string();
    if s.chars().count() > 160 {
        format!("{}…", s.chars().take(160).collect::<String>())
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub trap_limit: usize,
    /// Defaults to `4n` when absent.
    pub j_max: Option<usize>,
    /// Random compliant pairs tried by the rank test.
    pub random_pairs: usize,
    /// The random rank test only runs up to this many states.
    pub random_max_n: usize,
    pub random_max_degree: u32,
    pub seed: u64,
    pub record_timing: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            trap_limit: necessary::DEFAULT_TRAP_LIMIT,
            j_max: None,
            random_pairs: 4,
            random_max_n: 8,
            random_max_degree: 3,
            seed: RANDOM_PAIR_SEED,
            record_timing: false,
        }
    }
}

impl AnalysisOptions {
    /// Defaults with the trap limit taken from [`TRAP_LIMIT_ENV`] when set.
    pub fn from_env() -> Self {
        let mut opts = AnalysisOptions::default();
        if let Some(limit) = std::env::var(TRAP_LIMIT_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            opts.trap_limit = limit;
        }
        opts
    }
}

struct Recorder<'a> {
    opts: &'a AnalysisOptions,
    tests: Vec<TestRecord>,
}

impl Recorder<'_> {
    fn run<W: Serialize>(&mut self, name: &str, reference: &str, f: impl FnOnce() -> (Verdict, Option<W>)) -> Verdict {
        let start = Instant::now();
        let (verdict, witness) = f();
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        self.tests.push(TestRecord {
            name: name.to_string(),
            reference: reference.to_string(),
            verdict,
            witness: witness.map_or(Value::Null, |w| serde_json::to_value(w).expect("witness serializes")),
            elapsed_ms: self.opts.record_timing.then_some(elapsed),
        });
        verdict
    }
}

fn structural_record<W: Serialize>(v: StructuralVerdict<W>) -> (Verdict, Option<Value>) {
    match v {
        StructuralVerdict::Holds { witness } => (Verdict::Holds, Some(serde_json::to_value(witness).expect("serializes"))),
        StructuralVerdict::Fails { witness } => (Verdict::Fails, Some(serde_json::to_value(witness).expect("serializes"))),
    }
}

fn necessary_record<W: Serialize>(v: NecessaryVerdict<W>) -> (Verdict, Option<Value>) {
    match v {
        NecessaryVerdict::FailsNecessary { witness } => {
            (Verdict::FailsNecessary, Some(serde_json::to_value(witness).expect("serializes")))
        }
        NecessaryVerdict::PassesNecessary => (Verdict::PassesNecessary, None),
        NecessaryVerdict::Inconclusive { reason } => (Verdict::Inconclusive, Some(Value::String(reason))),
    }
}

/// Runs, in order: accessibility, the Hall condition, the cycle-cover condition,
/// the unreachable-count test, the acyclic-trap search, the monomial certificate
/// and, when the certificate does not settle the question and the pattern is
/// small, the exact rank test on seeded random compliant pairs.
pub fn analyze(g: &SparsityPattern, opts: &AnalysisOptions) -> AnalysisReport {
    let mut rec = Recorder { opts, tests: Vec::new() };
    let mut notes = Vec::new();

    let accessible = rec.run("accessibility", "every state node is reachable from an input node", || {
        let acc = g.accessibility();
        if acc.unreachable.is_empty() {
            (Verdict::Holds, None)
        } else {
            (Verdict::Fails, Some(acc.unreachable))
        }
    });
    rec.run(
        "hall-matching",
        "structural controllability: accessibility plus a matching saturating the state nodes",
        || structural_record(structural::structural_controllable(g)),
    );
    rec.run(
        "cycle-cover",
        "structural ensemble controllability: structural controllability plus a cycle cover of the state nodes",
        || structural_record(structural::structural_ensemble_controllable(g)),
    );
    let counting = rec.run(
        "unreachable-count",
        "necessary: |U(k)| <= m·k for every k, U(k) = states with no input walk longer than k",
        || necessary_record(necessary::counting_test(g)),
    );
    let trap = rec.run(
        "acyclic-trap",
        "necessary: no acyclic state set fed by one input with fewer in-neighbors than members",
        || necessary_record(necessary::acyclic_trap_search(g, opts.trap_limit)),
    );
    if trap == Verdict::FailsNecessary {
        notes.push("the acyclic-trap criterion is applied as stated; it has no independent check in this tool".to_string());
    }

    let j_max = opts.j_max.unwrap_or(4 * g.n());
    let certificate = rec.run(
        "monomial-certificate",
        "sufficient: monomial pair along a spanning tree whose averaged matrix is a sparse Hilbert matrix",
        || match construction::monomial_certificate(g) {
            Ok(cert) if cert.is_controllable() => (Verdict::Holds, Some(serde_json::to_value(&cert).expect("serializes"))),
            Ok(cert) => (Verdict::Inconclusive, Some(serde_json::to_value(&cert).expect("serializes"))),
            Err(refusal) => (Verdict::Refused, Some(serde_json::to_value(&refusal).expect("serializes"))),
        },
    );

    let certified_not = accessible == Verdict::Fails || counting == Verdict::FailsNecessary || trap == Verdict::FailsNecessary;
    let mut certified = certificate == Verdict::Holds;
    if !certified && !certified_not {
        if g.n() <= opts.random_max_n {
            let rank = rec.run(
                "random-rank",
                "sufficient: exact averaged rank of seeded random monomial pairs reaches n",
                || random_rank(g, opts, j_max),
            );
            certified = rank == Verdict::Holds;
        } else {
            notes.push(format!("random rank test skipped: n = {} exceeds {}", g.n(), opts.random_max_n));
        }
    }

    let classification = match (certified, certified_not) {
        (true, false) => Classification::StructurallyAveragedControllable,
        (false, true) => Classification::NotStructurallyAveragedControllable,
        (false, false) => Classification::Undetermined,
        (true, true) => {
            notes.push("sufficient and necessary tests disagree; reporting undetermined".to_string());
            Classification::Undetermined
        }
    };
    let tests = rec.tests;
    let inconclusive = if classification == Classification::Undetermined {
        tests
            .iter()
            .filter(|t| matches!(t.verdict, Verdict::Inconclusive | Verdict::Refused))
            .map(|t| t.name.clone())
            .collect()
    } else {
        Vec::new()
    };
    AnalysisReport {
        pattern_digest: g.digest(),
        n: g.n(),
        m: g.m(),
        tests,
        classification,
        inconclusive,
        notes,
    }
}

#[derive(Serialize)]
struct RandomRankWitness {
    seed: u64,
    pair_index: usize,
    max_degree: u32,
    trace: Vec<usize>,
    j_max: usize,
}

fn random_rank(g: &SparsityPattern, opts: &AnalysisOptions, j_max: usize) -> (Verdict, Option<RandomRankWitness>) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last = None;
    for pair_index in 0..opts.random_pairs {
        let (a, b) = construction::random_monomial_pair(g, &mut rng, opts.random_max_degree);
        let result = construction::averaged_rank_test(&a, &b, j_max).expect("conforming pair");
        let witness = RandomRankWitness {
            seed: opts.seed,
            pair_index,
            max_degree: opts.random_max_degree,
            trace: result.trace,
            j_max,
        };
        if result.verdict == RankVerdict::AveragedControllable {
            return (Verdict::Holds, Some(witness));
        }
        last = Some(witness);
    }
    (Verdict::Inconclusive, last)
}
