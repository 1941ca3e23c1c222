//! Small frameworks shared by the unit tests.

/// Loan application: alpha is the topic.
pub(crate) const LOAN: &str = r#"{
  "arguments": [
    {"id": "alpha", "base_score": 0.5},
    {"id": "beta", "base_score": 0.3},
    {"id": "gamma", "base_score": 0.6},
    {"id": "rho", "base_score": 0.7},
    {"id": "zeta", "base_score": 0.4}
  ],
  "attacks": [["gamma", "alpha"], ["rho", "beta"]],
  "supports": [["beta", "alpha"], ["zeta", "gamma"]]
}"#;

/// Four arguments with a mutual attack between alpha and beta.
pub(crate) const MUTUAL: &str = r#"{
  "arguments": [
    {"id": "alpha", "base_score": 0.5},
    {"id": "beta", "base_score": 0.5},
    {"id": "delta", "base_score": 0.5},
    {"id": "gamma", "base_score": 0.5}
  ],
  "attacks": [["alpha", "beta"], ["beta", "alpha"], ["beta", "delta"]],
  "supports": [["beta", "gamma"], ["gamma", "delta"]]
}"#;

/// All base scores 0. Under DF-QuAD the strength of alpha is
/// `t - t^2` in the base score `t` of beta, so beta's effect flips sign.
pub(crate) const NON_MONOTONE: &str = r#"{
  "arguments": [
    {"id": "alpha", "base_score": 0.0},
    {"id": "beta", "base_score": 0.0},
    {"id": "delta", "base_score": 0.0},
    {"id": "gamma", "base_score": 0.0}
  ],
  "attacks": [["beta", "alpha"]],
  "supports": [["beta", "gamma"], ["beta", "delta"], ["gamma", "delta"], ["delta", "alpha"]]
}"#;
