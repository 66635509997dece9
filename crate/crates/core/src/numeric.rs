//! Small numeric helpers shared across modules.

/// Neumaier-compensated summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Slack used when comparing accumulated float masses against a target.
pub const MASS_SLACK: f64 = 1e-12;

/// Mass comparisons. Uniform weights (`k / grain`) are compared exactly through
/// integer counts; general weights use [`MASS_SLACK`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassRule {
    Counts { grain: u64 },
    Float,
}

impl MassRule {
    pub fn for_grain(grain: Option<u64>) -> Self {
        match grain {
            Some(g) if g > 0 => MassRule::Counts { grain: g },
            _ => MassRule::Float,
        }
    }

    /// Does accumulated `mass` reach `target`?
    pub fn meets(self, mass: f64, target: f64) -> bool {
        match self {
            MassRule::Counts { grain } => {
                let g = grain as f64;
                let count = (mass * g).round();
                let needed = (target * g - 1e-9).ceil();
                count >= needed
            }
            MassRule::Float => mass >= target - MASS_SLACK,
        }
    }
}

/// Total order on floats for sorting finite values.
pub fn cmp_f64(a: &f64, b: &f64) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_of_many_uniform_weights_is_one() {
        let m = 100_000;
        let s = compensated_sum(std::iter::repeat_n(1.0 / m as f64, m));
        assert!((s - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn count_rule_is_exact_for_thirds() {
        let rule = MassRule::Counts { grain: 3 };
        let third = 1.0 / 3.0;
        assert!(rule.meets(third + third, 2.0 / 3.0));
        assert!(!rule.meets(third, 2.0 / 3.0));
    }
}
