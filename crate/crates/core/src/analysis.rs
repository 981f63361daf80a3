//! The end-to-end workflows: consistency checking with explanations, and
//! completion of partial models by enumeration.

use std::fmt::Write;
use std::time::Instant;

use thiserror::Error;

use crate::compiler::compile;
use crate::frontend::{Diagnostics, ResolvedMetamodel};
use crate::instance::{
    build_bounds, diff_completion, BoundProblem, CompletionError, CompletionReport, PartialInstance, ScopeConfig,
};
use crate::kernel::{Category, ConcreteInstance, ConstraintId, RelationKind};
use crate::sat::{Lit, SatError, SatOutcome, Solver};
use crate::span::{excerpt, SourceSpan};
use crate::translate::{interpret, translate, TranslateError, TranslateOptions, Translation};

#[derive(Debug, Error)]
pub enum AnalysisError {
    /// Bad input: scopes, instance facts.
    #[error("{0}")]
    Input(#[from] Diagnostics),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
    #[error(transparent)]
    Sat(#[from] SatError),
}

/// One constraint of a minimized unsatisfiable core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreMember {
    pub id: ConstraintId,
    pub label: String,
    pub category: Category,
    pub span: Option<SourceSpan>,
    pub formula: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnosis {
    pub core: Vec<CoreMember>,
}

impl Diagnosis {
    /// Lists each core member with its source excerpt and formula.
    /// `source` maps a file name to its text.
    pub fn render<'s>(&self, source: impl Fn(&str) -> Option<&'s str>) -> String {
        let mut out = format!("inconsistent: {} constraint(s) conflict\n", self.core.len());
        for m in &self.core {
            let _ = writeln!(out, "[{}] {}", m.category, m.label);
            if let Some(span) = &m.span {
                let _ = writeln!(out, "  --> {span}");
                if let Some(text) = source(&span.file) {
                    out.push_str(&excerpt(text, span));
                }
            }
            let _ = writeln!(out, "  formula: {}", m.formula);
        }
        out
    }

    pub fn labels(&self) -> Vec<&str> {
        self.core.iter().map(|m| m.label.as_str()).collect()
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Consistent(Box<CompletionReport>),
    Inconsistent(Diagnosis),
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent(_))
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub reports: Vec<CompletionReport>,
    /// Whether every solution was found before the limit.
    pub exhausted: bool,
}

/// A metamodel and partial instance, translated and ready to solve.
pub struct Session {
    pub mm: ResolvedMetamodel,
    pub instance: PartialInstance,
    pub bound: BoundProblem,
    pub translation: Translation,
    pub seed: Option<u64>,
    /// Time spent in the solver by the last workflow.
    pub solving_millis: u128,
    last_outcome: Option<bool>,
    last_model: Option<ConcreteInstance>,
}

impl Session {
    pub fn new(
        mm: ResolvedMetamodel,
        instance: PartialInstance,
        scope: &ScopeConfig,
        seed: Option<u64>,
    ) -> Result<Self, AnalysisError> {
        let problem = compile(&mm);
        let bound = build_bounds(&problem, &mm, &instance, scope)?;
        let translation = translate(
            &bound.problem,
            &bound.bounds,
            &TranslateOptions {
                bitwidth: scope.bitwidth,
            },
        )?;
        Ok(Session {
            mm,
            instance,
            bound,
            translation,
            seed,
            solving_millis: 0,
            last_outcome: None,
            last_model: None,
        })
    }

    fn solver(&self) -> Solver {
        let mut s = Solver::from_db(&self.translation.cnf);
        if let Some(seed) = self.seed {
            s.randomize(seed);
        }
        s
    }

    /// Every constraint selector, in constraint order.
    pub fn assumptions(&self) -> Vec<Lit> {
        self.translation.selectors.values().copied().collect()
    }

    /// Solves with every constraint enabled.
    pub fn check(&mut self) -> Result<Verdict, AnalysisError> {
        let start = Instant::now();
        let mut solver = self.solver();
        let outcome = solver.solve(&self.assumptions());
        self.solving_millis = start.elapsed().as_millis();
        match outcome {
            SatOutcome::Sat(a) => {
                let inst = interpret(&self.translation, &a)?;
                self.last_outcome = Some(true);
                self.last_model = Some(inst.clone());
                let report = diff_completion(&self.mm, &self.instance, &inst)?;
                Ok(Verdict::Consistent(Box::new(report)))
            }
            SatOutcome::Unsat(_) => {
                self.last_outcome = Some(false);
                self.last_model = None;
                Ok(Verdict::Inconsistent(self.diagnose()?))
            }
        }
    }

    /// A 1-minimal set of constraints that cannot hold together. Deletion
    /// runs from structural constraints towards instance facts, so the core
    /// keeps user-facing semantics and facts whenever they suffice.
    pub fn diagnose(&mut self) -> Result<Diagnosis, AnalysisError> {
        let start = Instant::now();
        let mut ordered: Vec<(Category, ConstraintId, Lit)> = self
            .translation
            .selectors
            .iter()
            .map(|(id, lit)| (self.bound.problem.constraint(*id).category, *id, *lit))
            .collect();
        ordered.sort();
        let lits: Vec<Lit> = ordered.iter().map(|(_, _, l)| *l).collect();
        let mut solver = self.solver();
        let core = solver.minimize_core(&lits)?;
        self.solving_millis += start.elapsed().as_millis();
        let mut members: Vec<CoreMember> = core
            .iter()
            .filter_map(|l| self.translation.constraint_of(*l))
            .map(|id| {
                let c = self.bound.problem.constraint(id);
                CoreMember {
                    id,
                    label: c.label.clone(),
                    category: c.category,
                    span: c.span.clone(),
                    formula: c.formula.to_string(),
                }
            })
            .collect();
        members.sort_by_key(|m| (m.category, m.id));
        Ok(Diagnosis { core: members })
    }

    /// Up to `max` distinct completions, in solver order.
    pub fn enumerate(&mut self, max: usize) -> Result<Enumeration, AnalysisError> {
        let start = Instant::now();
        let mut solver = self.solver();
        let projection = self.translation.varmap.primary_vars();
        let assumptions = self.assumptions();
        let mut reports = Vec::new();
        let mut exhausted = false;
        while reports.len() < max {
            match solver.next_model(&projection, &assumptions) {
                SatOutcome::Sat(a) => {
                    let inst = interpret(&self.translation, &a)?;
                    if reports.is_empty() {
                        self.last_model = Some(inst.clone());
                    }
                    reports.push(diff_completion(&self.mm, &self.instance, &inst)?);
                }
                SatOutcome::Unsat(_) => {
                    exhausted = true;
                    break;
                }
            }
        }
        if !exhausted && matches!(solver.next_model(&projection, &assumptions), SatOutcome::Unsat(_)) {
            exhausted = true;
        }
        self.last_outcome = Some(!reports.is_empty());
        self.solving_millis = start.elapsed().as_millis();
        Ok(Enumeration { reports, exhausted })
    }

    /// The translation log: universe, bounds, formulas, statistics and,
    /// after a satisfiable check, the model.
    pub fn render_log(&self) -> String {
        let mut out = String::new();
        let bounds = &self.bound.bounds;
        out.push_str("== Universe ==\n");
        let atoms = bounds.universe().atoms();
        let _ = writeln!(out, "[{}]", atoms.join(", "));
        type Filter = fn(RelationKind, usize) -> bool;
        let sections: [(&str, Filter); 3] = [
            ("Bounds for Unary Relations", |_, a| a == 1),
            ("Bounds for Internal Binary Relations", |k, a| {
                a > 1 && k != RelationKind::Feature
            }),
            ("Bounds for User Binary Relations", |k, a| {
                a > 1 && k == RelationKind::Feature
            }),
        ];
        for (title, pick) in sections {
            let _ = writeln!(out, "\n== {title} ==");
            for (r, lower, upper) in bounds.entries() {
                if pick(r.kind(), r.arity()) {
                    let _ = writeln!(out, "{}: lower={lower} upper={upper}", r.name());
                }
            }
        }
        out.push_str("\n== Generated Formulas ==\n");
        for c in &self.bound.problem.constraints {
            let sel = self
                .translation
                .selector(c.id)
                .map(|l| format!("s{}", l.var()))
                .unwrap_or_default();
            let at = c.span.as_ref().map(|s| format!(" @ {s}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{} {sel} [{}] {}{at}\n    {}",
                c.id, c.category, c.label, c.formula
            );
        }
        out.push_str("\n== Outcome and Statistics ==\n");
        let outcome = match self.last_outcome {
            Some(true) => "SAT",
            Some(false) => "UNSAT",
            None => "UNKNOWN",
        };
        let st = &self.translation.stats;
        let _ = writeln!(
            out,
            "vars={} clauses={} translation_ms={} solving_ms={} outcome={outcome}",
            st.num_vars, st.num_clauses, st.translation_millis, self.solving_millis
        );
        if let Some(model) = &self.last_model {
            out.push_str("\n== Generated Model ==\n");
            for (r, ts) in model.relations() {
                let _ = writeln!(out, "{} = {ts}", r.name());
            }
        }
        out
    }
}
