use proptest::prelude::*;

use twin_core::economics::Periodicity;
use twin_core::registry::{AttributeKind, CustomAttributeDef, ItemId, NewItem, Registry};
use twin_core::services::mwp::{schedule_occurrences, MwpEntry, Occurrence};
use twin_core::services::rules::{Audience, NotificationCenter, RuleSpec, Severity};
use twin_core::MaintenanceCategory;

fn center(band: [f64; 2]) -> NotificationCenter {
    let reg = Registry::new();
    let id = reg.create_item(NewItem::named("press").with_id("P1")).unwrap();
    reg.define_custom_attribute(&id, CustomAttributeDef::new("pressure", AttributeKind::Double, "bar"))
        .unwrap();
    let nc = NotificationCenter::new();
    nc.register_rule(
        &reg,
        RuleSpec {
            item: id,
            attr: "pressure".into(),
            band,
            severity: Severity::Warning,
            audience: Audience::Operator,
        },
    )
    .unwrap();
    nc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn one_notification_per_band_crossing(values in prop::collection::vec(-20.0f64..120.0, 1..200)) {
        let band = [0.0, 100.0];
        let nc = center(band);
        let item = ItemId::from("P1");
        let outside = |v: f64| v < band[0] || v > band[1];
        let mut raised = 0;
        for (i, v) in values.iter().enumerate() {
            raised += nc.evaluate(&item, i as f64, &[("pressure".to_string(), *v)]).len();
        }
        let expected = (0..values.len())
            .filter(|&i| outside(values[i]) && (i == 0 || !outside(values[i - 1])))
            .count();
        prop_assert_eq!(raised, expected);
        prop_assert_eq!(nc.since(0).len(), expected);
        prop_assert_eq!(nc.breaches(&item).len(), usize::from(outside(*values.last().unwrap())));
    }

    #[test]
    fn acknowledgement_is_monotone(values in prop::collection::vec(-20.0f64..120.0, 1..100),
                                   acks in prop::collection::vec(1u64..40, 0..40)) {
        let nc = center([0.0, 100.0]);
        let item = ItemId::from("P1");
        let mut acked = std::collections::BTreeSet::new();
        for (i, v) in values.iter().enumerate() {
            nc.evaluate(&item, i as f64, &[("pressure".to_string(), *v)]);
            if let Some(&a) = acks.get(i) {
                if nc.ack(a).is_ok() {
                    acked.insert(a);
                }
            }
            for n in nc.since(0) {
                prop_assert_eq!(n.acknowledged, acked.contains(&n.id));
            }
        }
    }
}

/// Earliest start of `o` at or after `t` within `idle`, meeting its window.
fn place_after(o: &Occurrence, idle: &[(f64, f64)], t: f64) -> Option<f64> {
    idle.iter()
        .map(|&(a, b)| (a.max(t).max(o.release), b))
        .find(|&(s, b)| s + o.duration <= b && s + o.duration <= o.deadline)
        .map(|(s, _)| s)
}

/// Tries every processing order, placing each occurrence as early as
/// possible after the previous one.
fn brute_force_feasible(occs: &[Occurrence], idle: &[(f64, f64)]) -> bool {
    fn go(occs: &[Occurrence], idle: &[(f64, f64)], used: &mut Vec<bool>, t: f64, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        for i in 0..occs.len() {
            if used[i] {
                continue;
            }
            if let Some(s) = place_after(&occs[i], idle, t) {
                used[i] = true;
                let ok = go(occs, idle, used, s + occs[i].duration, left - 1);
                used[i] = false;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    go(occs, idle, &mut vec![false; occs.len()], f64::NEG_INFINITY, occs.len())
}

fn valid_schedule(occs: &[Occurrence], idle: &[(f64, f64)], entries: &[MwpEntry]) -> Result<(), String> {
    if entries.len() != occs.len() {
        return Err("wrong entry count".into());
    }
    for o in occs {
        let e = entries
            .iter()
            .find(|e| e.op_id == o.op_id && e.occurrence == o.occurrence)
            .ok_or("occurrence missing")?;
        if e.start < o.release || e.end > o.deadline + 1e-9 || (e.end - e.start - o.duration).abs() > 1e-9 {
            return Err(format!("{} outside its window", o.op_id));
        }
        if !idle.iter().any(|&(a, b)| a <= e.start && e.end <= b + 1e-9) {
            return Err(format!("{} not in an idle window", o.op_id));
        }
    }
    let mut sorted: Vec<&MwpEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    if sorted.windows(2).any(|w| w[1].start < w[0].end - 1e-9) {
        return Err("entries overlap".into());
    }
    Ok(())
}

fn instance() -> impl Strategy<Value = (Vec<Occurrence>, Vec<(f64, f64)>)> {
    let occ = (0u32..40, 1u32..9, 0u32..20).prop_map(|(r, d, slack)| (r, d, slack));
    let occs = prop::collection::vec(occ, 1..=7);
    let gaps = prop::collection::vec((0u32..10, 1u32..20), 1..=6);
    (occs, gaps).prop_map(|(occs, gaps)| {
        let occs = occs
            .into_iter()
            .enumerate()
            .map(|(i, (r, d, slack))| Occurrence {
                op_id: format!("op{i}"),
                occurrence: 1,
                category: MaintenanceCategory::Mechanical,
                periodicity: Periodicity::Weekly,
                duration: d as f64,
                release: r as f64,
                deadline: (r + d + slack) as f64,
            })
            .collect();
        let mut idle = Vec::new();
        let mut t = 0.0;
        for (busy, free) in gaps {
            t += busy as f64;
            idle.push((t, t + free as f64));
            t += free as f64;
        }
        (occs, idle)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scheduler_agrees_with_exhaustive_search((occs, idle) in instance()) {
        let want = brute_force_feasible(&occs, &idle);
        match schedule_occurrences(&occs, &idle) {
            Ok(entries) => {
                prop_assert!(want, "scheduler placed an instance the oracle rejects");
                if let Err(e) = valid_schedule(&occs, &idle, &entries) {
                    prop_assert!(false, "{}", e);
                }
            }
            Err(_) => prop_assert!(!want, "scheduler missed a feasible placement"),
        }
    }
}
