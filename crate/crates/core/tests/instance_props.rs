use std::collections::BTreeSet;

use metareason_core::analysis::{Session, Verdict};
use metareason_core::frontend::{load_metamodel, ResolvedMetamodel};
use metareason_core::instance::{parse_instance, serialize_instance, ScopeConfig};
use metareason_core::kernel::holds;
use proptest::prelude::*;

const TOL: &str = include_str!("../../../fixtures/tol.aie");
const CLASSES: [&str; 6] = [
    "TruckList",
    "CarList",
    "BicycleList",
    "EnginedVehicle",
    "NonEnginedVehicle",
    "Nil",
];
const FEATURES: [&str; 3] = ["car", "cdr", "name"];

fn metamodel() -> ResolvedMetamodel {
    load_metamodel(TOL, "tol.aie").unwrap()
}

/// Instance text with only the links that typecheck on their own.
fn instance_text(mm: &ResolvedMetamodel, objects: &[usize], links: &[(usize, usize, usize)]) -> String {
    let decls: String = objects
        .iter()
        .enumerate()
        .map(|(i, &c)| format!("  object o{i} : {}\n", CLASSES[c]))
        .collect();
    let wrap = |body: &str| format!("instance r of tol {{\n{decls}{body}}}\n");
    let mut body = String::new();
    for &(s, f, t) in links {
        if objects.is_empty() {
            break;
        }
        let (s, t) = (s % objects.len(), t % objects.len());
        let line = match FEATURES[f] {
            "name" => format!(
                "  o{s}.name = \"{}\"\n",
                if t % 2 == 0 { "Ford F-150 XLT" } else { "Bike" }
            ),
            feature => format!("  o{s}.{feature} = o{t}\n"),
        };
        if parse_instance(&wrap(&line), "r.ais", mm).is_ok() {
            body.push_str(&line);
        }
    }
    wrap(&body)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn completions_partition_and_round_trip(
        objects in proptest::collection::vec(0..CLASSES.len(), 0..4),
        links in proptest::collection::vec((0..4usize, 0..FEATURES.len(), 0..4usize), 0..5),
    ) {
        let mm = metamodel();
        let text = instance_text(&mm, &objects, &links);
        let inst = parse_instance(&text, "r.ais", &mm).unwrap();
        let scopes = ScopeConfig { default_scope: 1, ..ScopeConfig::default() };
        let Ok(mut s) = Session::new(mm.clone(), inst.clone(), &scopes, None) else {
            // Scope conflicts, e.g. two asserted Nil objects.
            return Ok(());
        };
        for (r, lo, hi) in s.bound.bounds.entries() {
            prop_assert!(lo.is_subset(hi), "{}", r.name());
        }
        let Verdict::Consistent(report) = s.check().unwrap() else {
            return Ok(());
        };
        for c in &s.bound.problem.constraints {
            prop_assert!(holds(&report.completed, &c.formula).unwrap(), "{}", c.label);
        }
        // Objects: asserted and inferred are disjoint and cover the solution.
        let all: BTreeSet<String> = report.objects.iter().map(|(o, _)| o.clone()).collect();
        let asserted: BTreeSet<String> = inst.objects.iter().map(|o| o.name.clone()).collect();
        prop_assert!(asserted.is_disjoint(&report.inferred_objects));
        prop_assert_eq!(&asserted | &report.inferred_objects, all);
        // Links likewise, across ordinary and model features.
        let facts: BTreeSet<_> = report.links.iter().chain(&report.model_facts).cloned().collect();
        let inferred: BTreeSet<_> = report.inferred_links.union(&report.inferred_model_facts).cloned().collect();
        let base: BTreeSet<_> = facts.difference(&inferred).cloned().collect();
        prop_assert_eq!(base.len(), facts.len() - inferred.len());
        let base_atoms: BTreeSet<(String, String, String)> =
            inst.links.iter().map(|l| (l.source.clone(), l.feature.clone(), l.target.atom())).collect();
        let base_seen: BTreeSet<(String, String, String)> =
            base.iter().map(|l| (l.source.clone(), l.feature.clone(), l.target.clone())).collect();
        prop_assert_eq!(base_seen, base_atoms);

        // Serialized text parses back to the completed facts.
        let out = serialize_instance(&report);
        let back = parse_instance(&out, "out.ais", &mm).unwrap();
        let objs: BTreeSet<(String, String)> = back.objects.iter().map(|o| (o.name.clone(), o.class.clone())).collect();
        prop_assert_eq!(objs, report.objects.iter().cloned().collect::<BTreeSet<_>>());
        let reparsed: BTreeSet<(String, String, String)> =
            back.links.iter().map(|l| (l.source.clone(), l.feature.clone(), l.target.atom())).collect();
        let expected: BTreeSet<(String, String, String)> =
            facts.iter().map(|l| (l.source.clone(), l.feature.clone(), l.target.clone())).collect();
        prop_assert_eq!(reparsed, expected);

        let e = s.enumerate(4).unwrap();
        let texts: BTreeSet<String> = e.reports.iter().map(serialize_instance).collect();
        prop_assert_eq!(texts.len(), e.reports.len());
    }
}
