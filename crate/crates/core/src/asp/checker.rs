//! Brute-force answer-set checker.
//!
//! This is a test oracle, not a solver: grounding is naive full substitution,
//! and minimality is checked by enumerating subsets. Everything is guarded by
//! an atom budget (default 16 distinct ground atoms) so a mistake can only
//! cost milliseconds.

use std::collections::BTreeSet;

use super::{AspError, Literal, Program, Rule, Term};

pub const DEFAULT_ATOM_BUDGET: usize = 16;

/// A set of ground atoms (positive literals).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Interpretation {
    atoms: BTreeSet<Literal>,
}

impl Interpretation {
    pub fn new(atoms: impl IntoIterator<Item = Literal>) -> Interpretation {
        let atoms: BTreeSet<Literal> = atoms.into_iter().map(|a| a.positive()).collect();
        assert!(atoms.iter().all(Literal::is_ground), "interpretation atoms must be ground");
        Interpretation { atoms }
    }

    pub fn empty() -> Interpretation {
        Interpretation::default()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Literal> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, atom: &Literal) -> bool {
        self.atoms.contains(&atom.positive())
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.atoms.is_subset(&other.atoms)
    }

    /// Atom names in canonical sorted order, e.g. `["a", "p(1,x)"]`.
    pub fn atom_names(&self) -> Vec<String> {
        self.atoms.iter().map(|a| a.to_string()).collect()
    }
}

impl FromIterator<Literal> for Interpretation {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        Interpretation::new(iter)
    }
}

fn ensure_normal(program: &Program) -> Result<(), AspError> {
    if let Some(rule) = program.iter().find(|r| r.is_passthrough()) {
        return Err(AspError::Unsupported { statement: rule.source_text().to_string() });
    }
    Ok(())
}

fn ensure_ground(program: &Program) -> Result<(), AspError> {
    if let Some(rule) = program.iter().find(|r| !r.is_ground()) {
        return Err(AspError::NotGround { detail: rule.source_text().to_string() });
    }
    Ok(())
}

/// Distinct ground atoms occurring anywhere in `program` (the relevant
/// fragment of its Herbrand base).
fn atoms_of(program: &Program) -> BTreeSet<Literal> {
    program
        .iter()
        .flat_map(|r| r.head().into_iter().chain(r.body().iter()))
        .map(Literal::positive)
        .collect()
}

fn check_budget(program: &Program, budget: usize) -> Result<BTreeSet<Literal>, AspError> {
    let atoms = atoms_of(program);
    if atoms.len() > budget {
        return Err(AspError::CapacityExceeded { atoms: atoms.len(), budget });
    }
    Ok(atoms)
}

fn constants_of(program: &Program) -> BTreeSet<Term> {
    let mut consts = BTreeSet::new();
    for rule in program.iter() {
        for lit in rule.head().into_iter().chain(rule.body().iter()) {
            for term in &lit.terms {
                if !term.is_var() {
                    consts.insert(term.clone());
                }
            }
        }
    }
    consts
}

fn substitute(lit: &Literal, vars: &[String], binding: &[&Term]) -> Literal {
    Literal {
        predicate: lit.predicate.clone(),
        negated: lit.negated,
        terms: lit
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => {
                    let i = vars.iter().position(|x| x == v).expect("bound variable");
                    binding[i].clone()
                }
                other => other.clone(),
            })
            .collect(),
    }
}

/// Ground `program` by substituting every constant occurring in it for every
/// variable, in all combinations, with the default atom budget.
pub fn ground(program: &Program) -> Result<Program, AspError> {
    ground_with_budget(program, DEFAULT_ATOM_BUDGET)
}

pub fn ground_with_budget(program: &Program, budget: usize) -> Result<Program, AspError> {
    ensure_normal(program)?;
    let consts: Vec<Term> = constants_of(program).into_iter().collect();
    let mut out: Vec<Rule> = Vec::new();
    for rule in program.iter() {
        let mut vars: Vec<String> = Vec::new();
        for lit in rule.head().into_iter().chain(rule.body().iter()) {
            for term in &lit.terms {
                if let Term::Var(v) = term {
                    if !vars.contains(v) {
                        vars.push(v.clone());
                    }
                }
            }
        }
        if vars.is_empty() {
            out.push(rule.clone());
            continue;
        }
        if consts.is_empty() {
            // No ground instances exist for this rule.
            continue;
        }
        let combos = consts
            .len()
            .checked_pow(vars.len() as u32)
            .filter(|&n| n <= 1 << 20)
            .ok_or(AspError::CapacityExceeded { atoms: usize::MAX, budget })?;
        for mut idx in 0..combos {
            let binding: Vec<&Term> = (0..vars.len())
                .map(|_| {
                    let t = &consts[idx % consts.len()];
                    idx /= consts.len();
                    t
                })
                .collect();
            let head = rule.head().map(|h| substitute(h, &vars, &binding));
            let body = rule.body().iter().map(|b| substitute(b, &vars, &binding)).collect();
            out.push(Rule::new(head, body));
        }
    }
    let grounded = Program::new(out, program.label.clone());
    check_budget(&grounded, budget)?;
    Ok(grounded)
}

/// Does `interp` classically satisfy this (ground) rule?
fn satisfies(rule: &Rule, interp: &Interpretation) -> bool {
    let body_fires = rule
        .body()
        .iter()
        .all(|lit| if lit.negated { !interp.contains(lit) } else { interp.contains(lit) });
    if !body_fires {
        return true;
    }
    match rule.head() {
        Some(h) => interp.contains(h),
        None => false,
    }
}

/// The reduct of ground `program` with respect to `interp`: keep exactly the
/// rules whose positive body is contained in `interp` and whose negated body
/// is disjoint from it, then delete the negated literals from kept rules.
pub fn reduct(program: &Program, interp: &Interpretation) -> Result<Program, AspError> {
    ensure_normal(program)?;
    ensure_ground(program)?;
    let kept = program.iter().filter_map(|rule| {
        let keep = rule.body().iter().all(|lit| {
            if lit.negated {
                !interp.contains(lit)
            } else {
                interp.contains(lit)
            }
        });
        if !keep {
            return None;
        }
        let body: Vec<Literal> = rule.body().iter().filter(|l| !l.negated).cloned().collect();
        Some(Rule::new(rule.head().cloned(), body))
    });
    Ok(Program::new(kept, program.label.clone()))
}

fn subsets_of(atoms: &[Literal]) -> impl Iterator<Item = Interpretation> + '_ {
    (0u64..(1u64 << atoms.len())).map(move |mask| {
        Interpretation::new(
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone()),
        )
    })
}

/// Is `interp` a subset-minimal model of the reduct of `program` w.r.t. itself?
pub fn is_answer_set(program: &Program, interp: &Interpretation) -> Result<bool, AspError> {
    is_answer_set_with_budget(program, interp, DEFAULT_ATOM_BUDGET)
}

fn is_answer_set_with_budget(
    program: &Program,
    interp: &Interpretation,
    budget: usize,
) -> Result<bool, AspError> {
    ensure_normal(program)?;
    ensure_ground(program)?;
    check_budget(program, budget)?;
    let red = reduct(program, interp)?;
    if !red.iter().all(|r| satisfies(r, interp)) {
        return Ok(false);
    }
    // Minimality: no proper subset of interp is a model of the reduct.
    let own: Vec<Literal> = interp.atoms().cloned().collect();
    for candidate in subsets_of(&own) {
        if candidate.len() == interp.len() {
            continue;
        }
        if red.iter().all(|r| satisfies(r, &candidate)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All answer sets of ground `program`, by exhaustive subset enumeration over
/// the atoms occurring in it.
pub fn enumerate_answer_sets(program: &Program) -> Result<BTreeSet<Interpretation>, AspError> {
    enumerate_with_budget(program, DEFAULT_ATOM_BUDGET)
}

pub fn enumerate_with_budget(
    program: &Program,
    budget: usize,
) -> Result<BTreeSet<Interpretation>, AspError> {
    ensure_normal(program)?;
    ensure_ground(program)?;
    let atoms: Vec<Literal> = check_budget(program, budget)?.into_iter().collect();
    let mut out = BTreeSet::new();
    for candidate in subsets_of(&atoms) {
        if is_answer_set_with_budget(program, &candidate, budget)? {
            out.insert(candidate);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::parse_program;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    fn interp(names: &[&str]) -> Interpretation {
        let text: String = names.iter().map(|n| format!("{n}.")).collect();
        Interpretation::new(prog(&text).iter().filter_map(|r| r.head().cloned()))
    }

    fn sets(program: &Program) -> Vec<Vec<String>> {
        enumerate_answer_sets(program)
            .unwrap()
            .into_iter()
            .map(|i| i.atom_names())
            .collect()
    }

    #[test]
    fn ground_is_fixed_point_on_ground_input() {
        let p = prog("a :- b, not c. b.");
        assert_eq!(ground(&p).unwrap(), p);
    }

    #[test]
    fn ground_substitutes_all_constants() {
        let p = prog("d(a). d(b). p(X) :- q(X).");
        let g = ground(&p).unwrap();
        assert!(g.contains_text("p(a) :- q(a)."));
        assert!(g.contains_text("p(b) :- q(b)."));
        // facts survive untouched
        assert!(g.contains_text("d(a)."));
    }

    #[test]
    fn ground_enumerates_substitution_grid() {
        let p = prog("s(a). s(b). r(X,Y) :- s(X), s(Y).");
        let g = ground(&p).unwrap();
        let instances = g.iter().filter(|r| r.mentions("r")).count();
        assert_eq!(instances, 4);
    }

    #[test]
    fn ground_respects_budget() {
        let text: String = (0..9).map(|i| format!("c({i}). ")).collect::<String>()
            + "p(X,Y) :- c(X), c(Y).";
        let err = ground(&prog(&text)).unwrap_err();
        assert!(matches!(err, AspError::CapacityExceeded { .. }));
    }

    #[test]
    fn reduct_drops_negation_satisfied_rule() {
        let p = prog("a :- not b.");
        let r = reduct(&p, &interp(&[])).unwrap();
        assert_eq!(r.to_text(), "a.\n");
        let r = reduct(&p, &interp(&["b"])).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn reduct_keeps_firing_rules_and_strips_negation() {
        let p = prog("a :- b, not c. b.");
        let r = reduct(&p, &interp(&["a", "b"])).unwrap();
        assert_eq!(r.to_text(), "a :- b.\nb.\n");
    }

    #[test]
    fn reduct_requires_ground_input() {
        let p = prog("p(X) :- q(X).");
        assert!(matches!(reduct(&p, &interp(&[])), Err(AspError::NotGround { .. })));
    }

    #[test]
    fn answer_set_of_single_fact() {
        let p = prog("a.");
        assert!(is_answer_set(&p, &interp(&["a"])).unwrap());
        assert!(!is_answer_set(&p, &interp(&[])).unwrap());
    }

    #[test]
    fn even_loop_answer_sets() {
        let p = prog("a :- not b. b :- not a.");
        assert!(is_answer_set(&p, &interp(&["a"])).unwrap());
        assert!(is_answer_set(&p, &interp(&["b"])).unwrap());
        assert!(!is_answer_set(&p, &interp(&["a", "b"])).unwrap());
        assert!(!is_answer_set(&p, &interp(&[])).unwrap());
        assert_eq!(sets(&p), vec![vec!["a".to_string()], vec!["b".to_string()]]);
    }

    #[test]
    fn constraint_eliminates_all_candidates() {
        let p = prog("a. :- a.");
        assert!(!is_answer_set(&p, &interp(&[])).unwrap());
        assert!(!is_answer_set(&p, &interp(&["a"])).unwrap());
        assert!(sets(&p).is_empty());
    }

    #[test]
    fn empty_program_has_empty_answer_set() {
        assert_eq!(sets(&Program::empty()), vec![Vec::<String>::new()]);
    }

    #[test]
    fn underivable_atom_stays_out() {
        let p = prog("a :- b.");
        assert_eq!(sets(&p), vec![Vec::<String>::new()]);
    }

    #[test]
    fn enumeration_respects_budget() {
        let text: String = (0..17).map(|i| format!("p({i}). ")).collect();
        let err = enumerate_answer_sets(&prog(&text)).unwrap_err();
        assert!(matches!(err, AspError::CapacityExceeded { atoms: 17, budget: 16 }));
    }

    #[test]
    fn passthrough_is_rejected_by_checker() {
        let p = prog("{ a }.");
        assert!(matches!(enumerate_answer_sets(&p), Err(AspError::Unsupported { .. })));
    }

    #[test]
    fn every_enumerated_set_is_a_classical_model() {
        let p = prog("a :- not b. b :- not a. c :- a. c :- b.");
        for i in enumerate_answer_sets(&p).unwrap() {
            for rule in p.iter() {
                assert!(satisfies(rule, &i), "{i:?} must satisfy {rule}");
            }
        }
    }
}
