//! Test battery checked against independently computed reference values
//! (R / SciPy / statsmodels on the classic PlantGrowth dataset) and against
//! structural properties.

use proptest::prelude::*;
use twin_core::stats::{
    ad_p_value, anderson_darling, dist::t_quantile, games_howell, games_howell_summaries,
    levene_test, one_way_anova, qtukey, variance_ratio_test, GroupSummary, LeveneCenter,
    SampleGroup, Summary, VarianceMethod,
};

const CTRL: [f64; 10] = [4.17, 5.58, 5.18, 6.11, 4.50, 4.61, 5.17, 4.53, 5.33, 5.14];
const TRT1: [f64; 10] = [4.81, 4.17, 4.41, 3.59, 5.87, 3.83, 6.03, 4.89, 4.32, 4.69];
const TRT2: [f64; 10] = [6.31, 5.12, 5.54, 5.50, 5.37, 5.29, 4.92, 6.15, 5.80, 5.26];

fn plant_growth() -> Vec<SampleGroup> {
    vec![
        SampleGroup::new("ctrl", CTRL.to_vec()).unwrap(),
        SampleGroup::new("trt1", TRT1.to_vec()).unwrap(),
        SampleGroup::new("trt2", TRT2.to_vec()).unwrap(),
    ]
}

#[test]
fn anova_plant_growth() {
    let r = one_way_anova(&plant_growth()).unwrap();
    assert!((r.f - 4.846087862380136).abs() < 1e-9);
    assert!((r.p_value - 0.0159099583256229).abs() < 1e-9);
    assert_eq!((r.df_between, r.df_within), (2, 27));
}

#[test]
fn levene_plant_growth_both_centres() {
    let median = levene_test(&plant_growth(), LeveneCenter::Median).unwrap();
    assert!((median.w - 1.1191856948703909).abs() < 1e-9);
    assert!((median.p_value - 0.3412266241254737).abs() < 1e-9);
    let mean = levene_test(&plant_growth(), LeveneCenter::Mean).unwrap();
    assert!((mean.w - 1.2369629544697844).abs() < 1e-9);
    assert!((mean.p_value - 0.30619492299144685).abs() < 1e-9);
}

#[test]
fn anderson_darling_plant_growth() {
    let all: Vec<f64> = CTRL.iter().chain(&TRT1).chain(&TRT2).copied().collect();
    let r = anderson_darling(&SampleGroup::new("weight", all).unwrap()).unwrap();
    assert!((r.a_squared - 0.15066048566210455).abs() < 1e-9);
    assert!((r.p_value - 0.9567458733521913).abs() < 1e-9);
    let ctrl = anderson_darling(&SampleGroup::new("ctrl", CTRL.to_vec()).unwrap()).unwrap();
    assert!((ctrl.a_squared - 0.28286259365299493).abs() < 1e-9);
    assert!((ctrl.p_value - 0.554609913101782).abs() < 1e-9);
}

#[test]
fn published_a_squared_p_pairs() {
    // A² → p as printed for the four MWP-generation-time groups (n = 50).
    for (a2, p) in [(0.51, 0.193), (0.83, 0.031), (0.35, 0.463), (0.42, 0.310)] {
        let n = 50.0;
        let got = ad_p_value(a2 * (1.0 + 0.75 / n + 2.25 / (n * n)));
        assert!((got - p).abs() < 0.005, "A² {a2}: {got} vs {p}");
    }
}

#[test]
fn summary_of_plant_growth_ctrl() {
    let s = Summary::of(&SampleGroup::new("ctrl", CTRL.to_vec()).unwrap()).unwrap();
    assert!((s.mean - 5.032).abs() < 1e-12);
    assert!((s.median - 5.155).abs() < 1e-12);
    assert_eq!((s.min, s.max), (4.17, 6.11));
}

#[test]
fn games_howell_milling_summaries() {
    let r = games_howell_summaries(
        &[
            GroupSummary::new("before", 49.36, 14.01, 50),
            GroupSummary::new("after", 4.49, 2.59, 50),
        ],
        0.05,
    )
    .unwrap();
    let c = &r[0];
    assert!((c.t_value + 22.269254).abs() < 1e-5);
    assert!((c.df - 52.345356).abs() < 1e-5);
    assert!((c.critical - 2.0063317251).abs() < 1e-6);
    assert!(((c.ci.1 - c.ci.0) / 2.0 - 4.042529).abs() < 1e-4);
}

#[test]
fn three_group_games_howell_uses_studentized_range() {
    let r = games_howell(&plant_growth(), 0.05).unwrap();
    assert_eq!(r.len(), 3);
    for c in &r {
        let q = qtukey(0.95, 3, c.df).unwrap() / std::f64::consts::SQRT_2;
        assert!((c.critical - q).abs() < 1e-12);
        assert!(c.critical > t_quantile(0.975, c.df).unwrap());
    }
}

fn group_strategy() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-50.0f64..50.0, 8..25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn raw_and_summary_games_howell_agree(a in group_strategy(), b in group_strategy()) {
        let ga = SampleGroup::new("a", a).unwrap();
        let gb = SampleGroup::new("b", b).unwrap();
        let raw = games_howell(&[ga.clone(), gb.clone()], 0.05).unwrap();
        let summ = games_howell_summaries(&[GroupSummary::of(&ga), GroupSummary::of(&gb)], 0.05).unwrap();
        prop_assert_eq!(raw, summ);
    }

    #[test]
    fn p_values_in_unit_interval(a in group_strategy(), b in group_strategy()) {
        let ga = SampleGroup::new("a", a).unwrap();
        let gb = SampleGroup::new("b", b).unwrap();
        let anova = one_way_anova(&[ga.clone(), gb.clone()]).unwrap();
        prop_assert!((0.0..=1.0).contains(&anova.p_value) && anova.f.is_finite());
        for m in [VarianceMethod::Bonett, VarianceMethod::Levene] {
            let r = variance_ratio_test(&ga, &gb, 1.0, m).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.p_value) && r.statistic.is_finite());
        }
        let ad = anderson_darling(&ga).unwrap();
        prop_assert!(ad.a_squared >= 0.0 && (0.0..=1.0).contains(&ad.p_value));
        let gh = games_howell(&[ga, gb], 0.05).unwrap();
        prop_assert!((0.0..=1.0).contains(&gh[0].adjusted_p));
        prop_assert!(gh[0].ci.0 <= gh[0].diff && gh[0].diff <= gh[0].ci.1);
        prop_assert!((gh[0].t_value.abs() - gh[0].diff.abs() / gh[0].se).abs() < 1e-9);
    }

    #[test]
    fn scale_equivariance(a in group_strategy(), b in group_strategy(), c in 0.01f64..100.0) {
        let ga = SampleGroup::new("a", a).unwrap();
        let gb = SampleGroup::new("b", b).unwrap();
        let (sa, sb) = (ga.scaled(c), gb.scaled(c));
        let f1 = one_way_anova(&[ga.clone(), gb.clone()]).unwrap();
        let f2 = one_way_anova(&[sa.clone(), sb.clone()]).unwrap();
        prop_assert!((f1.f - f2.f).abs() <= 1e-6 * f1.f.max(1.0));
        let l1 = variance_ratio_test(&ga, &gb, 1.0, VarianceMethod::Levene).unwrap();
        let l2 = variance_ratio_test(&sa, &sb, 1.0, VarianceMethod::Levene).unwrap();
        prop_assert!((l1.statistic - l2.statistic).abs() <= 1e-6 * l1.statistic.max(1.0));
        let a1 = anderson_darling(&ga).unwrap();
        let a2 = anderson_darling(&sa).unwrap();
        prop_assert!((a1.p_value - a2.p_value).abs() < 1e-9);
        let g1 = &games_howell(&[ga, gb], 0.05).unwrap()[0];
        let g2 = &games_howell(&[sa, sb], 0.05).unwrap()[0];
        prop_assert!((g2.diff - c * g1.diff).abs() <= 1e-7 * (c * g1.diff).abs().max(1.0));
        prop_assert!((g2.se - c * g1.se).abs() <= 1e-7 * (c * g1.se).max(1.0));
        prop_assert_eq!(g1.ci.0 > 0.0 || g1.ci.1 < 0.0, g2.ci.0 > 0.0 || g2.ci.1 < 0.0);
    }

    #[test]
    fn anova_label_permutation_invariant(a in group_strategy(), b in group_strategy()) {
        let ga = SampleGroup::new("a", a).unwrap();
        let gb = SampleGroup::new("b", b).unwrap();
        let ab = one_way_anova(&[ga.clone(), gb.clone()]).unwrap();
        let ba = one_way_anova(&[gb.clone(), ga.clone()]).unwrap();
        prop_assert!((ab.f - ba.f).abs() <= 1e-9 * ab.f.max(1.0));
        let d1 = games_howell(&[ga.clone(), gb.clone()], 0.05).unwrap()[0].diff;
        let d2 = games_howell(&[gb, ga], 0.05).unwrap()[0].diff;
        prop_assert!((d1 + d2).abs() < 1e-9);
    }
}
