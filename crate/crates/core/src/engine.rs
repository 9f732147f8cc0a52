//! Formula evaluation.
//!
//! Every node of a formula carries one attribute: the set of states where
//! the subformula holds. Attributes are synthesized bottom-up; a node's set
//! is computed only from the sets of its children. Temporal nodes reduce to
//! fixpoint iteration over `Pre`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cgs::{CgsError, Coalition, GameStructure};
use crate::parser::{format, Formula, Players};
use crate::pre::{self, Backend, PreError, RelationCache};
use crate::set::SatSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error(transparent)]
    Pre(#[from] PreError),
}

/// Result of one `Pre`-based evaluation of a temporal operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixpoint {
    pub set: SatSet,
    /// Executions of the loop body; zero for next.
    pub iterations: usize,
    pub pre_calls: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub pre_calls: usize,
    /// Loop iterations summed over all temporal nodes.
    pub fixpoint_iterations: usize,
    /// Largest iteration count of a single temporal node.
    pub max_fixpoint_iterations: usize,
    pub elapsed: Duration,
}

impl Stats {
    fn record(&mut self, fp: &Fixpoint) {
        self.pre_calls += fp.pre_calls;
        self.fixpoint_iterations += fp.iterations;
        self.max_fixpoint_iterations = self.max_fixpoint_iterations.max(fp.iterations);
    }
}

/// Attribute of one formula node, in post-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub node: usize,
    pub formula: String,
    pub satisfying: SatSet,
    /// Present for temporal nodes.
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub satisfying: SatSet,
    pub formula: Formula,
    pub backend: Backend,
    pub trace: Option<Vec<TraceEntry>>,
    pub stats: Stats,
    /// Propositions missing from the structure that were read as empty.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions {
    pub backend: Backend,
    /// Record the per-node attribute table.
    pub trace: bool,
    /// Treat unknown propositions as labelling no state instead of failing.
    pub lenient_atoms: bool,
}

/// Evaluates formulas against one structure.
///
/// Relations for the relational backend are cached across calls, so a
/// checker reused for several formulas builds each coalition's relation once.
#[derive(Debug)]
pub struct Checker<'s> {
    structure: &'s GameStructure,
    options: CheckOptions,
    cache: Arc<RelationCache>,
}

/// One-shot convenience wrapper around [`Checker`].
pub fn check(s: &GameStructure, f: &Formula, backend: Backend) -> Result<CheckResult, CheckError> {
    Checker::new(
        s,
        CheckOptions {
            backend,
            ..CheckOptions::default()
        },
    )
    .check(f)
}

impl<'s> Checker<'s> {
    pub fn new(structure: &'s GameStructure, options: CheckOptions) -> Self {
        Self::with_cache(structure, options, Arc::new(RelationCache::new()))
    }

    pub fn with_cache(
        structure: &'s GameStructure,
        options: CheckOptions,
        cache: Arc<RelationCache>,
    ) -> Self {
        Checker {
            structure,
            options,
            cache,
        }
    }

    pub fn structure(&self) -> &'s GameStructure {
        self.structure
    }

    pub fn backend(&self) -> Backend {
        self.options.backend
    }

    pub fn check(&self, f: &Formula) -> Result<CheckResult, CheckError> {
        let start = Instant::now();
        let mut eval = Evaluation {
            checker: self,
            stats: Stats::default(),
            trace: self.options.trace.then(Vec::new),
            warnings: Vec::new(),
            next_node: 0,
        };
        let satisfying = eval.eval(f)?;
        let mut stats = eval.stats;
        stats.elapsed = start.elapsed();
        Ok(CheckResult {
            satisfying,
            formula: f.clone(),
            backend: self.options.backend,
            trace: eval.trace,
            stats,
            warnings: eval.warnings,
        })
    }

    /// `Pre(A, Θ)` through the configured backend.
    pub fn pre(&self, a: &Coalition, theta: &SatSet) -> Result<SatSet, PreError> {
        match self.options.backend {
            Backend::Direct => pre::pre_direct(self.structure, a, theta),
            Backend::Relational => {
                let rel = self.cache.get(self.structure, a);
                pre::pre_relational(self.structure, &rel, theta)
            }
        }
    }

    pub fn eval_next(&self, a: &Coalition, phi: &SatSet) -> Result<Fixpoint, CheckError> {
        Ok(Fixpoint {
            set: self.pre(a, phi)?,
            iterations: 0,
            pre_calls: 1,
        })
    }

    /// Greatest fixpoint: Z = φ ∩ Pre(A, Z).
    pub fn eval_always(&self, a: &Coalition, phi: &SatSet) -> Result<Fixpoint, CheckError> {
        let mut z = self.structure.all_states();
        let mut z1 = phi.clone();
        let (mut iterations, mut pre_calls) = (0, 0);
        while !z.is_subset(&z1) {
            z = z1;
            z1 = self.pre(a, &z)?.intersection(phi);
            iterations += 1;
            pre_calls += 1;
        }
        Ok(Fixpoint {
            set: z,
            iterations,
            pre_calls,
        })
    }

    /// Least fixpoint: Z = φ ∪ Pre(A, Z).
    pub fn eval_eventually(&self, a: &Coalition, phi: &SatSet) -> Result<Fixpoint, CheckError> {
        let mut z = self.structure.no_states();
        let mut z1 = phi.clone();
        let (mut iterations, mut pre_calls) = (0, 0);
        while !z1.is_subset(&z) {
            z = z.union(&z1);
            z1 = self.pre(a, &z)?;
            iterations += 1;
            pre_calls += 1;
        }
        Ok(Fixpoint {
            set: z,
            iterations,
            pre_calls,
        })
    }

    /// Least fixpoint: Z = φ₂ ∪ (φ₁ ∩ Pre(A, Z)).
    pub fn eval_until(
        &self,
        a: &Coalition,
        phi1: &SatSet,
        phi2: &SatSet,
    ) -> Result<Fixpoint, CheckError> {
        let mut z = self.structure.no_states();
        let mut z1 = phi2.clone();
        let (mut iterations, mut pre_calls) = (0, 0);
        while !z1.is_subset(&z) {
            z = z.union(&z1);
            z1 = self.pre(a, &z)?.intersection(phi1);
            iterations += 1;
            pre_calls += 1;
        }
        Ok(Fixpoint {
            set: z,
            iterations,
            pre_calls,
        })
    }

    fn resolve(&self, players: &Players) -> Result<Coalition, CheckError> {
        self.structure
            .coalition(players.names())
            .map_err(|e| match e {
                CgsError::UnknownPlayer(name) => CheckError::UnknownPlayer(name),
                other => unreachable!("coalition lookup failed: {other}"),
            })
    }
}

struct Evaluation<'c, 's> {
    checker: &'c Checker<'s>,
    stats: Stats,
    trace: Option<Vec<TraceEntry>>,
    warnings: Vec<String>,
    next_node: usize,
}

impl Evaluation<'_, '_> {
    fn eval(&mut self, f: &Formula) -> Result<SatSet, CheckError> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.eval_node(f))
    }

    fn eval_node(&mut self, f: &Formula) -> Result<SatSet, CheckError> {
        let s = self.checker.structure;
        let mut iterations = None;
        let set = match f {
            Formula::True => s.all_states(),
            Formula::False => s.no_states(),
            Formula::Atom(p) => match s.states_labeled(p) {
                Ok(set) => set,
                Err(_) if self.checker.options.lenient_atoms => {
                    if !self.warnings.contains(p) {
                        self.warnings.push(p.clone());
                    }
                    s.no_states()
                }
                Err(_) => return Err(CheckError::UnknownProposition(p.clone())),
            },
            Formula::Not(a) => self.eval(a)?.complement(),
            Formula::And(a, b) => {
                let a = self.eval(a)?;
                a.intersection(&self.eval(b)?)
            }
            Formula::Or(a, b) => {
                let a = self.eval(a)?;
                a.union(&self.eval(b)?)
            }
            Formula::Imply(a, b) => {
                let a = self.eval(a)?;
                a.complement().union(&self.eval(b)?)
            }
            Formula::Next(p, a) | Formula::Always(p, a) | Formula::Eventually(p, a) => {
                let coalition = self.checker.resolve(p)?;
                let phi = self.eval(a)?;
                let fp = match f {
                    Formula::Next(..) => self.checker.eval_next(&coalition, &phi)?,
                    Formula::Always(..) => self.checker.eval_always(&coalition, &phi)?,
                    _ => self.checker.eval_eventually(&coalition, &phi)?,
                };
                self.stats.record(&fp);
                iterations = Some(fp.iterations);
                fp.set
            }
            Formula::Until(p, a, b) => {
                let coalition = self.checker.resolve(p)?;
                let phi1 = self.eval(a)?;
                let phi2 = self.eval(b)?;
                let fp = self.checker.eval_until(&coalition, &phi1, &phi2)?;
                self.stats.record(&fp);
                iterations = Some(fp.iterations);
                fp.set
            }
        };
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEntry {
                node: self.next_node,
                formula: format(f),
                satisfying: set.clone(),
                iterations,
            });
        }
        self.next_node += 1;
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgs::tests::example;
    use crate::parser::parse;

    fn set(s: &GameStructure, names: &[&str]) -> SatSet {
        SatSet::from_states(s.num_states(), names.iter().map(|n| s.state_id(n).unwrap()))
    }

    fn run(s: &GameStructure, text: &str) -> SatSet {
        let f = parse(text).unwrap();
        let direct = check(s, &f, Backend::Direct).unwrap();
        let relational = check(s, &f, Backend::Relational).unwrap();
        assert_eq!(direct.satisfying, relational.satisfying, "{text}");
        direct.satisfying
    }

    fn checker(s: &GameStructure) -> Checker<'_> {
        Checker::new(s, CheckOptions::default())
    }

    #[test]
    fn example_formulas() {
        let s = example();
        assert_eq!(run(&s, "<<1>>@ (x and y)"), set(&s, &["q2", "q3"]));
        assert_eq!(run(&s, "not x"), set(&s, &["q0", "q2"]));
        assert_eq!(run(&s, "<<1>>~ (x and y)"), set(&s, &["q2", "q3"]));
        assert_eq!(run(&s, "<<1,2>>~ (x and y)"), s.all_states());
        assert_eq!(run(&s, "x => y"), set(&s, &["q0", "q2", "q3"]));
        assert_eq!(run(&s, "true"), s.all_states());
        assert_eq!(run(&s, "false"), s.no_states());
    }

    #[test]
    fn next_operator() {
        let s = example();
        let c = checker(&s);
        let one = s.coalition(&["1"]).unwrap();
        assert_eq!(
            c.eval_next(&one, &set(&s, &["q3"])).unwrap().set,
            set(&s, &["q2", "q3"])
        );
        assert_eq!(
            c.eval_next(&one, &s.all_states()).unwrap().set,
            s.all_states()
        );
        assert_eq!(
            c.eval_next(&Coalition::empty(), &set(&s, &["q1", "q3"]))
                .unwrap()
                .set,
            set(&s, &["q1", "q3"])
        );
    }

    #[test]
    fn always_operator() {
        let s = example();
        let c = checker(&s);
        let x = set(&s, &["q1", "q3"]);
        assert_eq!(c.eval_always(&s.grand_coalition(), &x).unwrap().set, x);
        let full = c
            .eval_always(&s.grand_coalition(), &s.all_states())
            .unwrap();
        assert_eq!(full.set, s.all_states());
        assert_eq!(full.iterations, 0);
        assert!(c
            .eval_always(&Coalition::empty(), &set(&s, &["q0"]))
            .unwrap()
            .set
            .is_empty());
    }

    #[test]
    fn eventually_operator() {
        let s = example();
        let c = checker(&s);
        let one = s.coalition(&["1"]).unwrap();
        let q3 = set(&s, &["q3"]);
        let fp = c.eval_eventually(&one, &q3).unwrap();
        assert_eq!(fp.set, set(&s, &["q2", "q3"]));
        assert_eq!(fp.iterations, 2);
        assert!(c
            .eval_eventually(&one, &s.no_states())
            .unwrap()
            .set
            .is_empty());
        assert_eq!(
            c.eval_eventually(&s.grand_coalition(), &q3).unwrap().set,
            s.all_states()
        );
    }

    #[test]
    fn until_operator() {
        let s = example();
        let c = checker(&s);
        let one = s.coalition(&["1"]).unwrap();
        let not_x = set(&s, &["q0", "q2"]);
        let q3 = set(&s, &["q3"]);
        assert_eq!(
            c.eval_until(&one, &not_x, &q3).unwrap().set,
            set(&s, &["q2", "q3"])
        );
        assert!(c
            .eval_until(&one, &not_x, &s.no_states())
            .unwrap()
            .set
            .is_empty());
        for phi in [q3.clone(), not_x.clone(), set(&s, &["q1"])] {
            assert_eq!(
                c.eval_until(&one, &s.all_states(), &phi).unwrap().set,
                c.eval_eventually(&one, &phi).unwrap().set
            );
        }
    }

    #[test]
    fn unknown_names() {
        let s = example();
        assert_eq!(
            check(&s, &parse("z").unwrap(), Backend::Direct).unwrap_err(),
            CheckError::UnknownProposition("z".into())
        );
        assert_eq!(
            check(&s, &parse("<<3>>@ x").unwrap(), Backend::Direct).unwrap_err(),
            CheckError::UnknownPlayer("3".into())
        );
        let lenient = Checker::new(
            &s,
            CheckOptions {
                lenient_atoms: true,
                ..Default::default()
            },
        )
        .check(&parse("z or x").unwrap())
        .unwrap();
        assert_eq!(lenient.satisfying, set(&s, &["q1", "q3"]));
        assert_eq!(lenient.warnings, vec!["z".to_string()]);
    }

    #[test]
    fn trace_is_post_order() {
        let s = example();
        let result = Checker::new(
            &s,
            CheckOptions {
                trace: true,
                ..Default::default()
            },
        )
        .check(&parse("<<1>>@ (x and y)").unwrap())
        .unwrap();
        let trace = result.trace.unwrap();
        let formulas: Vec<&str> = trace.iter().map(|t| t.formula.as_str()).collect();
        assert_eq!(
            formulas,
            vec!["x", "y", "(x) and (y)", "<<1>>@ ((x) and (y))"]
        );
        assert_eq!(trace.last().unwrap().satisfying, result.satisfying);
        assert_eq!(trace.last().unwrap().iterations, Some(0));
        assert_eq!(result.stats.pre_calls, 1);
    }
}
