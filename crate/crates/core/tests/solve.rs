mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use common::{oracle, tiny_ecmp, tiny_sdn, TinyCase};
use vnfplace::model::{count_migrations, count_replicas, Method, ModelInstance, VarKey, VarKind};
use vnfplace::solve::{
    export_lp, parse_lp, solve_exact, solve_heuristic, verify, LpDocument, SolveBudget, SolveStatus,
};

fn case(sdn: bool, seed: u64) -> Option<TinyCase> {
    if sdn {
        tiny_sdn(seed)
    } else {
        tiny_ecmp(seed)
    }
}

fn model_of(sdn: bool, seed: u64, method: usize, alpha: f64) -> Option<ModelInstance> {
    case(sdn, seed).map(|c| c.model(Method::ALL[method], alpha))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, max_global_rejects: 4096, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(10))]

    #[test]
    fn exact_matches_enumeration(sdn in any::<bool>(), seed in 1000u64..100_000, method in 0usize..3, alpha in 0.0f64..=1.0) {
        let model = model_of(sdn, seed, method, alpha);
        prop_assume!(model.is_some());
        let model = model.unwrap();
        let sol = solve_exact(&model, &SolveBudget::default());
        prop_assert_eq!(sol.status, SolveStatus::Optimal);
        prop_assert!(verify(&model, &sol.assignment).feasible);
        let truth = oracle::enumerate(&model).expect("enumeration finds a point");
        let got = oracle::rational_objective(&model, &sol.assignment).expect("exact point completes");
        prop_assert_eq!(got, truth.optimum);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn heuristic_is_feasible_and_never_beats_exact(sdn in any::<bool>(), seed in 1000u64..100_000, method in 0usize..3, alpha in 0.0f64..=1.0, hseed in any::<u64>()) {
        let model = model_of(sdn, seed, method, alpha);
        prop_assume!(model.is_some());
        let model = model.unwrap();
        let budget = SolveBudget::default();
        let heur = solve_heuristic(&model, hseed, &budget);
        prop_assert!(heur.status.has_solution());
        let check = verify(&model, &heur.assignment);
        prop_assert!(check.feasible, "{:?}", check.violations.first());
        prop_assert!((check.objective - heur.objective_value).abs() <= 1e-9);
        let exact = solve_exact(&model, &budget);
        prop_assert!(heur.objective_value >= exact.objective_value - 1e-9);
        let placement = model.placement(&model.decisions(&heur.assignment).unwrap());
        let initial = model.data.initial.as_ref().unwrap();
        match Method::ALL[method] {
            Method::Migration => prop_assert_eq!(count_replicas(&placement), 0),
            Method::Replication => prop_assert_eq!(count_migrations(initial, &placement), 0),
            Method::Combined => {}
        }
    }

    #[test]
    fn combined_never_worse_than_replication(sdn in any::<bool>(), seed in 1000u64..100_000, alpha in 0.0f64..=1.0) {
        let c = case(sdn, seed);
        prop_assume!(c.is_some());
        let c = c.unwrap();
        let budget = SolveBudget::default();
        let value = |m| solve_exact(&c.model(m, alpha), &budget).objective_value;
        prop_assert!(value(Method::Combined) <= value(Method::Replication) + 1e-9);
    }

    #[test]
    fn models_are_well_formed(sdn in any::<bool>(), seed in 1000u64..100_000, method in 0usize..3, alpha in 0.0f64..=1.0) {
        let model = model_of(sdn, seed, method, alpha);
        prop_assume!(model.is_some());
        let model = model.unwrap();
        let n = model.variables.len();
        let vars: HashSet<_> = model.variables.iter().map(|v| v.name.as_str()).collect();
        let rows: HashSet<_> = model.constraints.iter().map(|c| c.name.as_str()).collect();
        prop_assert_eq!(vars.len(), n);
        prop_assert_eq!(rows.len(), model.constraints.len());
        for (j, v) in model.variables.iter().enumerate() {
            prop_assert_eq!(model.var(&v.key), Some(j));
            if v.kind == VarKind::Binary {
                prop_assert_eq!((v.lower, v.upper), (0.0, 1.0));
            }
            prop_assert!(v.lower <= v.upper);
        }
        prop_assert!(model.constraints.iter().all(|c| c.terms.iter().all(|&(j, a)| j < n && a.is_finite())));
        prop_assert!(model.objective.iter().all(|&(j, _)| j < n));
    }

    #[test]
    fn lp_text_roundtrips(sdn in any::<bool>(), seed in 1000u64..100_000, method in 0usize..3, alpha in 0.0f64..=1.0) {
        let model = model_of(sdn, seed, method, alpha);
        prop_assume!(model.is_some());
        let model = model.unwrap();
        let text = export_lp(&model);
        prop_assert_eq!(common::lp_grammar::check(&text), Ok(()));
        let doc = parse_lp(&text).unwrap();
        let expected = LpDocument::from_model(&model).canonical();
        prop_assert_eq!(&doc.canonical(), &expected);
        prop_assert_eq!(parse_lp(&doc.to_text()).unwrap().canonical(), expected);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn verify_catches_perturbations(sdn in any::<bool>(), seed in 1000u64..100_000, method in 0usize..3, pick in any::<prop::sample::Index>()) {
        let model = model_of(sdn, seed, method, 0.5);
        prop_assume!(model.is_some());
        let model = model.unwrap();
        let sol = solve_heuristic(&model, 1, &SolveBudget::default());
        let mut x = sol.assignment.clone();
        let routes: Vec<usize> = model
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v.key, VarKey::RouteDemand { .. }))
            .map(|(j, _)| j)
            .collect();
        let j = routes[pick.index(routes.len())];
        x[j] = 1.0 - x[j];
        prop_assert!(!verify(&model, &x).feasible);

        let mut y = sol.assignment.clone();
        y[j] = 0.5;
        prop_assert!(!verify(&model, &y).feasible);
    }
}
