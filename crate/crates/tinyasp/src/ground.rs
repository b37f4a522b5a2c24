//! Bottom-up grounding.
//!
//! Instantiation works over the set of *possible* atoms: the least set closed
//! under rule application when negative body literals are ignored. Joining
//! positive body literals against that set keeps the ground program close to
//! what can actually be derived, instead of substituting the full Herbrand
//! universe into every rule.

use std::collections::{HashMap, HashSet};

use crate::syntax::{Atom, Rule, Term};
use crate::Error;

/// A ground rule over interned atom ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: Option<u32>,
    pub pos: Vec<u32>,
    pub neg: Vec<u32>,
}

/// Ground program plus the atom table it is expressed over.
#[derive(Debug)]
pub struct GroundProgram {
    pub atoms: Vec<Atom>,
    pub rules: Vec<GroundRule>,
}

impl GroundProgram {
    pub fn atom_name(&self, id: u32) -> String {
        self.atoms[id as usize].to_string()
    }
}

struct AtomTable {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, u32>,
}

impl AtomTable {
    fn new() -> Self {
        AtomTable { atoms: Vec::new(), ids: HashMap::new() }
    }

    fn intern(&mut self, atom: Atom) -> u32 {
        if let Some(&id) = self.ids.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.ids.insert(atom.clone(), id);
        self.atoms.push(atom);
        id
    }

}

type Subst = HashMap<String, Term>;

fn apply(atom: &Atom, subst: &Subst) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        terms: atom
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| t.clone()),
                other => other.clone(),
            })
            .collect(),
    }
}

/// Try to extend `subst` so that `pattern` matches `target`.
fn unify_into(pattern: &Atom, target: &Atom, subst: &mut Subst) -> bool {
    debug_assert_eq!(pattern.predicate, target.predicate);
    debug_assert_eq!(pattern.terms.len(), target.terms.len());
    let mut added: Vec<String> = Vec::new();
    for (p, t) in pattern.terms.iter().zip(&target.terms) {
        let ok = match p {
            Term::Var(v) => match subst.get(v) {
                Some(bound) => bound == t,
                None => {
                    subst.insert(v.clone(), t.clone());
                    added.push(v.clone());
                    true
                }
            },
            other => other == t,
        };
        if !ok {
            for v in added {
                subst.remove(&v);
            }
            return false;
        }
    }
    true
}

fn check_safety(rules: &[Rule]) -> Result<(), Error> {
    for rule in rules {
        let mut pos_vars: Vec<&str> = Vec::new();
        for lit in &rule.body {
            if !lit.negated {
                lit.atom.collect_vars(&mut pos_vars);
            }
        }
        let mut needed: Vec<&str> = Vec::new();
        if let Some(head) = &rule.head {
            head.collect_vars(&mut needed);
        }
        for lit in &rule.body {
            if lit.negated {
                lit.atom.collect_vars(&mut needed);
            }
        }
        for v in needed {
            if !pos_vars.contains(&v) {
                return Err(Error::UnsafeVariable { variable: v.to_string(), line: rule.line });
            }
        }
    }
    Ok(())
}

/// Index of possible atoms by predicate name and arity.
struct PossibleSet {
    by_pred: HashMap<(String, usize), Vec<Atom>>,
    all: HashSet<Atom>,
}

impl PossibleSet {
    fn new() -> Self {
        PossibleSet { by_pred: HashMap::new(), all: HashSet::new() }
    }

    fn insert(&mut self, atom: Atom) -> bool {
        if !self.all.insert(atom.clone()) {
            return false;
        }
        self.by_pred
            .entry((atom.predicate.clone(), atom.terms.len()))
            .or_default()
            .push(atom);
        true
    }

    fn contains(&self, atom: &Atom) -> bool {
        self.all.contains(atom)
    }

    fn candidates(&self, pattern: &Atom) -> &[Atom] {
        self.by_pred
            .get(&(pattern.predicate.clone(), pattern.terms.len()))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }
}

/// Enumerate all substitutions that satisfy the positive body against `possible`,
/// invoking `emit` for each complete substitution.
fn for_each_match(pos_body: &[&Atom], possible: &PossibleSet, subst: &mut Subst, emit: &mut dyn FnMut(&Subst)) {
    match pos_body.split_first() {
        None => emit(subst),
        Some((first, rest)) => {
            let pattern = apply(first, subst);
            if pattern.is_ground() {
                if possible.contains(&pattern) {
                    for_each_match(rest, possible, subst, emit);
                }
                return;
            }
            // Clone candidate list to keep the borrow checker out of the recursion.
            let cands: Vec<Atom> = possible.candidates(&pattern).to_vec();
            for cand in cands {
                let before: Vec<String> = pattern
                    .terms
                    .iter()
                    .filter_map(|t| match t {
                        Term::Var(v) if !subst.contains_key(v) => Some(v.clone()),
                        _ => None,
                    })
                    .collect();
                if unify_into(&pattern, &cand, subst) {
                    for_each_match(rest, possible, subst, emit);
                    for v in &before {
                        subst.remove(v);
                    }
                }
            }
        }
    }
}

const MAX_POSSIBLE_ATOMS: usize = 200_000;
const MAX_GROUND_RULES: usize = 1_000_000;

/// Ground `rules` into a variable-free program.
pub fn ground(rules: &[Rule]) -> Result<GroundProgram, Error> {
    check_safety(rules)?;

    // Fixpoint of possible atoms (negation ignored).
    let mut possible = PossibleSet::new();
    loop {
        let mut grew = false;
        for rule in rules {
            let Some(head) = &rule.head else { continue };
            let pos: Vec<&Atom> = rule.body.iter().filter(|l| !l.negated).map(|l| &l.atom).collect();
            let mut new_heads: Vec<Atom> = Vec::new();
            let mut subst = Subst::new();
            for_each_match(&pos, &possible, &mut subst, &mut |s| {
                new_heads.push(apply(head, s));
            });
            for h in new_heads {
                debug_assert!(h.is_ground());
                grew |= possible.insert(h);
            }
            if possible.all.len() > MAX_POSSIBLE_ATOMS {
                return Err(Error::TooLarge(format!(
                    "more than {MAX_POSSIBLE_ATOMS} atoms during grounding"
                )));
            }
        }
        if !grew {
            break;
        }
    }

    // Final pass: collect ground instances over the complete possible set.
    let mut table = AtomTable::new();
    let mut out: Vec<GroundRule> = Vec::new();
    let mut seen: HashSet<GroundRule> = HashSet::new();
    for rule in rules {
        let pos: Vec<&Atom> = rule.body.iter().filter(|l| !l.negated).map(|l| &l.atom).collect();
        let neg: Vec<&Atom> = rule.body.iter().filter(|l| l.negated).map(|l| &l.atom).collect();
        let mut subst = Subst::new();
        let mut instances: Vec<(Option<Atom>, Vec<Atom>, Vec<Atom>)> = Vec::new();
        for_each_match(&pos, &possible, &mut subst, &mut |s| {
            let head = rule.head.as_ref().map(|h| apply(h, s));
            let pos_g: Vec<Atom> = pos.iter().map(|a| apply(a, s)).collect();
            // A negative literal whose atom can never be derived is simply true.
            let neg_g: Vec<Atom> =
                neg.iter().map(|a| apply(a, s)).filter(|a| possible.contains(a)).collect();
            instances.push((head, pos_g, neg_g));
        });
        for (head, pos_g, neg_g) in instances {
            let gr = GroundRule {
                head: head.map(|h| table.intern(h)),
                pos: pos_g.into_iter().map(|a| table.intern(a)).collect(),
                neg: neg_g.into_iter().map(|a| table.intern(a)).collect(),
            };
            if seen.insert(gr.clone()) {
                out.push(gr);
            }
            if out.len() > MAX_GROUND_RULES {
                return Err(Error::TooLarge(format!("more than {MAX_GROUND_RULES} ground rules")));
            }
        }
    }

    // Atoms that occur only under negation still need ids for the solver.
    let _ = &mut table;
    Ok(GroundProgram { atoms: table.atoms, rules: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn names(g: &GroundProgram) -> Vec<String> {
        g.atoms.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn grounds_transitive_closure() {
        let rules = parse("e(1,2). e(2,3). r(X,Y) :- e(X,Y). r(X,Z) :- r(X,Y), e(Y,Z).").unwrap();
        let g = ground(&rules).unwrap();
        let n = names(&g);
        assert!(n.contains(&"r(1,3)".to_string()));
        assert!(!n.iter().any(|a| a.contains('X')));
    }

    #[test]
    fn unsafe_rule_rejected() {
        let rules = parse("p(X) :- q.").unwrap();
        match ground(&rules) {
            Err(Error::UnsafeVariable { variable, .. }) => assert_eq!(variable, "X"),
            other => panic!("expected unsafe variable error, got {other:?}"),
        }
    }

    #[test]
    fn unsafe_negative_var_rejected() {
        let rules = parse("p :- not q(X).").unwrap();
        assert!(matches!(ground(&rules), Err(Error::UnsafeVariable { .. })));
    }

    #[test]
    fn underivable_negative_literal_drops_out() {
        let rules = parse("a :- not b.").unwrap();
        let g = ground(&rules).unwrap();
        assert_eq!(g.rules.len(), 1);
        assert!(g.rules[0].neg.is_empty(), "b can never be derived");
    }

    #[test]
    fn negative_literal_kept_when_derivable() {
        let rules = parse("b :- c. c. a :- not b.").unwrap();
        let g = ground(&rules).unwrap();
        let a_rule = g.rules.iter().find(|r| r.head.map(|h| g.atom_name(h)) == Some("a".into())).unwrap();
        assert_eq!(a_rule.neg.len(), 1);
    }
}
