//! Fixture models shared by unit tests.

use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use crate::empirical::{Distribution, EmpiricalModel};
use crate::scenario::MeasurementScenario;

pub fn chsh() -> MeasurementScenario {
    MeasurementScenario::new(
        ["a1", "a2", "b1", "b2"],
        [["a1", "b1"], ["a1", "b2"], ["a2", "b1"], ["a2", "b2"]],
        ["0", "1"],
    )
}

pub fn ws() -> MeasurementScenario {
    MeasurementScenario::new(["(p,s)", "(p,a)"], [["(p,s)"], ["(p,a)"]], ["A", "B"])
}

pub fn quarter_box() -> EmpiricalModel {
    EmpiricalModel::from_rows(
        chsh(),
        vec![
            vec![0.5, 0.0, 0.0, 0.5],
            vec![0.375, 0.125, 0.125, 0.375],
            vec![0.375, 0.125, 0.125, 0.375],
            vec![0.125, 0.375, 0.375, 0.125],
        ],
    )
    .unwrap()
}

pub fn pr_box() -> EmpiricalModel {
    EmpiricalModel::from_rows(
        chsh(),
        vec![
            vec![0.5, 0.0, 0.0, 0.5],
            vec![0.0, 0.5, 0.5, 0.0],
            vec![0.5, 0.0, 0.0, 0.5],
            vec![0.5, 0.0, 0.0, 0.5],
        ],
    )
    .unwrap()
}

/// Crowd-sourced survey rows at three decimals (each sums to 0.998).
pub fn survey_rows() -> Vec<Vec<f64>> {
    vec![
        vec![0.402, 0.097, 0.097, 0.402],
        vec![0.044, 0.455, 0.455, 0.044],
        vec![0.345, 0.154, 0.154, 0.345],
        vec![0.344, 0.155, 0.155, 0.344],
    ]
}

pub fn survey() -> EmpiricalModel {
    let s = chsh();
    let ds = s
        .maximal_contexts()
        .unwrap()
        .into_iter()
        .zip(survey_rows())
        .map(|(c, r)| Distribution::with_rounding_repair(c, 2, r, 5e-3).unwrap().0)
        .collect();
    EmpiricalModel::new(s, ds).unwrap()
}

pub fn deterministic_aa() -> EmpiricalModel {
    EmpiricalModel::from_rows(chsh(), vec![vec![1.0, 0.0, 0.0, 0.0]; 4]).unwrap()
}

pub fn uniform_product() -> EmpiricalModel {
    EmpiricalModel::from_rows(chsh(), vec![vec![0.25; 4]; 4]).unwrap()
}

/// Symmetric row `(s, d, d, s)` with `s + d = 1/2`.
pub fn symmetric_row(same: f64) -> Vec<f64> {
    let s = same / 2.0;
    let d = 0.5 - s;
    vec![s, d, d, s]
}

pub fn arb_symmetric_chsh() -> impl Strategy<Value = EmpiricalModel> {
    proptest::collection::vec(0.0f64..=1.0, 4)
        .prop_map(|same| EmpiricalModel::from_rows(chsh(), same.into_iter().map(symmetric_row).collect()).unwrap())
}
