//! Answer-set computation for ground programs.
//!
//! Programs whose ground atom dependency graph has no cycle through negation
//! are evaluated stratum by stratum as least fixpoints, which yields the
//! single answer set directly. All other programs fall back to assignment
//! enumeration with the Gelfond-Lifschitz stability test (least model of the
//! reduct must equal the candidate); that path is only intended for small
//! programs and is guarded by an atom limit.

use crate::ground::{GroundProgram, GroundRule};
use crate::Error;

const MAX_ENUM_ATOMS: usize = 24;

/// All answer sets, each a sorted list of atom ids.
pub fn answer_sets(program: &GroundProgram, max_models: usize) -> Result<(Vec<Vec<u32>>, bool), Error> {
    let n = program.atoms.len();
    let (derivation_rules, constraints): (Vec<&GroundRule>, Vec<&GroundRule>) =
        program.rules.iter().partition(|r| r.head.is_some());

    let mut models = if stratified(n, &derivation_rules) {
        let truth = stratified_model(n, &derivation_rules);
        if violates_constraint(&truth, &constraints) {
            Vec::new()
        } else {
            vec![truth_to_model(&truth)]
        }
    } else {
        if n > MAX_ENUM_ATOMS {
            return Err(Error::TooLarge(format!(
                "program has a cycle through negation over {n} atoms (limit {MAX_ENUM_ATOMS})"
            )));
        }
        enumerate_stable(n, &derivation_rules, &constraints)
    };

    // Deterministic output order: atoms within a model and the models
    // themselves are sorted by rendered name.
    for model in &mut models {
        model.sort_by_cached_key(|&id| program.atom_name(id));
    }
    models.sort_by_cached_key(|m| m.iter().map(|&id| program.atom_name(id)).collect::<Vec<_>>());
    let exhausted = max_models == 0 || models.len() <= max_models;
    if max_models > 0 && models.len() > max_models {
        models.truncate(max_models);
    }
    Ok((models, exhausted))
}

fn truth_to_model(truth: &[bool]) -> Vec<u32> {
    truth
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| if t { Some(i as u32) } else { None })
        .collect()
}

fn violates_constraint(truth: &[bool], constraints: &[&GroundRule]) -> bool {
    constraints.iter().any(|c| {
        c.pos.iter().all(|&a| truth[a as usize]) && c.neg.iter().all(|&a| !truth[a as usize])
    })
}

/// Tarjan SCCs, iterative. Returns (component id per atom, components in
/// dependency-first order).
fn sccs(n: usize, adj: &[Vec<u32>]) -> (Vec<u32>, Vec<Vec<u32>>) {
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut comp = vec![u32::MAX; n];
    let mut comps: Vec<Vec<u32>> = Vec::new();
    let mut counter: u32 = 0;

    for start in 0..n as u32 {
        if index[start as usize] != u32::MAX {
            continue;
        }
        // (node, next child index)
        let mut call: Vec<(u32, usize)> = vec![(start, 0)];
        index[start as usize] = counter;
        low[start as usize] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start as usize] = true;

        while let Some(&mut (v, ref mut ci)) = call.last_mut() {
            if *ci < adj[v as usize].len() {
                let w = adj[v as usize][*ci];
                *ci += 1;
                if index[w as usize] == u32::MAX {
                    index[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent as usize] = low[parent as usize].min(low[v as usize]);
                }
                if low[v as usize] == index[v as usize] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("scc stack underflow");
                        on_stack[w as usize] = false;
                        comp[w as usize] = comps.len() as u32;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(component);
                }
            }
        }
    }
    (comp, comps)
}

/// Atom dependency graph: head -> every body atom.
fn dependency_adj(n: usize, rules: &[&GroundRule]) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); n];
    for rule in rules {
        let h = rule.head.expect("derivation rule") as usize;
        for &b in rule.pos.iter().chain(&rule.neg) {
            adj[h].push(b);
        }
    }
    adj
}

/// True iff no negative edge connects two atoms of the same SCC.
fn stratified(n: usize, rules: &[&GroundRule]) -> bool {
    let adj = dependency_adj(n, rules);
    let (comp, _) = sccs(n, &adj);
    for rule in rules {
        let h = rule.head.expect("derivation rule") as usize;
        for &b in &rule.neg {
            if comp[h] == comp[b as usize] {
                return false;
            }
        }
    }
    true
}

/// Perfect model of a stratified program: SCCs in dependency order, least
/// fixpoint within each component, negation looked up from settled strata.
fn stratified_model(n: usize, rules: &[&GroundRule]) -> Vec<bool> {
    let adj = dependency_adj(n, rules);
    let (comp, comps) = sccs(n, &adj);

    let mut rules_by_comp: Vec<Vec<&GroundRule>> = vec![Vec::new(); comps.len()];
    for rule in rules {
        let h = rule.head.expect("derivation rule");
        rules_by_comp[comp[h as usize] as usize].push(rule);
    }

    let mut truth = vec![false; n];
    // Tarjan emits components only after everything they reach, so iterating
    // in emission order settles dependencies first.
    for comp_rules in &rules_by_comp {
        loop {
            let mut grew = false;
            for rule in comp_rules {
                let h = rule.head.expect("derivation rule") as usize;
                if truth[h] {
                    continue;
                }
                let fires = rule.pos.iter().all(|&a| truth[a as usize])
                    && rule.neg.iter().all(|&a| !truth[a as usize]);
                if fires {
                    truth[h] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
    }
    truth
}

/// Least model of the reduct of `rules` with respect to `candidate`.
fn reduct_least_model(n: usize, rules: &[&GroundRule], candidate: &[bool]) -> Vec<bool> {
    let kept: Vec<&GroundRule> = rules
        .iter()
        .filter(|r| r.neg.iter().all(|&a| !candidate[a as usize]))
        .copied()
        .collect();
    let mut truth = vec![false; n];
    loop {
        let mut grew = false;
        for rule in &kept {
            let h = rule.head.expect("derivation rule") as usize;
            if !truth[h] && rule.pos.iter().all(|&a| truth[a as usize]) {
                truth[h] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    truth
}

fn enumerate_stable(n: usize, rules: &[&GroundRule], constraints: &[&GroundRule]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut candidate = vec![false; n];
    for mask in 0u64..(1u64 << n) {
        for (i, slot) in candidate.iter_mut().enumerate() {
            *slot = mask & (1 << i) != 0;
        }
        let least = reduct_least_model(n, rules, &candidate);
        if least == candidate && !violates_constraint(&candidate, constraints) {
            out.push(truth_to_model(&candidate));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ground;
    use crate::syntax::parse;

    fn solve_names(src: &str) -> Vec<Vec<String>> {
        let g = ground(&parse(src).unwrap()).unwrap();
        let (models, _) = answer_sets(&g, 0).unwrap();
        models
            .into_iter()
            .map(|m| m.into_iter().map(|id| g.atom_name(id)).collect())
            .collect()
    }

    #[test]
    fn facts_only() {
        assert_eq!(solve_names("a. b."), vec![vec!["a".to_string(), "b".to_string()]]);
    }

    #[test]
    fn empty_program_has_empty_answer_set() {
        assert_eq!(solve_names(""), vec![Vec::<String>::new()]);
    }

    #[test]
    fn negation_as_failure() {
        assert_eq!(solve_names("a :- not b."), vec![vec!["a".to_string()]]);
    }

    #[test]
    fn even_loop_has_two_answer_sets() {
        let models = solve_names("a :- not b. b :- not a.");
        assert_eq!(models, vec![vec!["a".to_string()], vec!["b".to_string()]]);
    }

    #[test]
    fn odd_loop_has_none() {
        assert!(solve_names("a :- not a.").is_empty());
    }

    #[test]
    fn constraint_kills_model() {
        assert!(solve_names("a. :- a.").is_empty());
    }

    #[test]
    fn constraint_selects_branch() {
        let models = solve_names("a :- not b. b :- not a. :- a.");
        assert_eq!(models, vec![vec!["b".to_string()]]);
    }

    #[test]
    fn underivable_body_atom() {
        assert_eq!(solve_names("a :- b."), vec![Vec::<String>::new()]);
    }

    #[test]
    fn atom_level_stratification() {
        // Same predicate on both sides of negation but acyclic at the atom level.
        let models = solve_names("q(1). p(1) :- q(1), not p(2).");
        assert_eq!(models, vec![vec!["p(1)".to_string(), "q(1)".to_string()]]);
    }

    #[test]
    fn positive_recursion_in_component() {
        let models = solve_names("e(1,2). e(2,1). r(X,Y) :- e(X,Y). r(X,Z) :- r(X,Y), e(Y,Z).");
        assert_eq!(models.len(), 1);
        assert!(models[0].contains(&"r(1,1)".to_string()));
    }
}
