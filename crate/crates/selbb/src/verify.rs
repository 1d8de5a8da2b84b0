//! Formula checks for the `verify-bounds` subcommand.

use selbb_core::bounds::{
    cost_ratio, detectable_cost_bits, message_lower_bound, modular_bound, static_db_lower_bound_bits,
    total_bb_cost_bits, BaseCost, BoundsError, ModularBoundParams, Rational,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case")]
pub enum Formula {
    DetectableCostBits {
        n: usize,
        t: usize,
        #[serde(rename = "D")]
        d: usize,
    },
    TotalBbCostBits {
        n: usize,
        t: usize,
        #[serde(rename = "L")]
        l: usize,
    },
    StaticDbLowerBoundBits {
        n: usize,
        f: usize,
        #[serde(rename = "L")]
        l: usize,
    },
    MessageLowerBound {
        t: usize,
    },
    ModularBound {
        t: usize,
        #[serde(rename = "B")]
        b: u32,
        i: u32,
        /// Rational as `"p"` or `"p/q"`.
        alpha: String,
        /// `M_*(n') = n'^k`.
        m_star_power: u32,
    },
    /// `2 < (2n - 2t - 1) / (n - 2t) < 4` for every `1 <= t <= t_max` and
    /// `3t + 1 <= n <= 3t + 1 + extra`.
    RatioBetweenTwoAndFour {
        t_max: usize,
        extra: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    #[serde(flatten)]
    pub formula: Formula,
    /// Expected exact value; omitted checks only report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub label: String,
    pub value: String,
    pub ok: bool,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.trim().parse().map_err(|_| format!("not a rational: {s}"))
}

fn eval(formula: &Formula) -> Result<Rational, BoundsError> {
    Ok(match *formula {
        Formula::DetectableCostBits { n, t, d } => detectable_cost_bits(n, t, d)?,
        Formula::TotalBbCostBits { n, t, l } => total_bb_cost_bits(n, t, l)?,
        Formula::StaticDbLowerBoundBits { n, f, l } => static_db_lower_bound_bits(n, f, l)?,
        Formula::MessageLowerBound { t } => Rational::from_integer(message_lower_bound(t).into()),
        Formula::ModularBound {
            t,
            b,
            i,
            ref alpha,
            m_star_power,
        } => {
            let alpha = parse_rational(alpha).map_err(|_| BoundsError::Invalid("alpha"))?;
            modular_bound(
                ModularBoundParams {
                    b,
                    i,
                    alpha,
                    m_star: BaseCost::Power(m_star_power),
                },
                t,
            )?
        }
        Formula::RatioBetweenTwoAndFour { .. } => unreachable!("handled by run_check"),
    })
}

fn label(formula: &Formula) -> String {
    match formula {
        Formula::DetectableCostBits { n, t, d } => format!("detectable_cost_bits(n={n}, t={t}, D={d})"),
        Formula::TotalBbCostBits { n, t, l } => format!("total_bb_cost_bits(n={n}, t={t}, L={l})"),
        Formula::StaticDbLowerBoundBits { n, f, l } => {
            format!("static_db_lower_bound_bits(n={n}, f={f}, L={l})")
        }
        Formula::MessageLowerBound { t } => format!("message_lower_bound(t={t})"),
        Formula::ModularBound {
            t,
            b,
            i,
            alpha,
            m_star_power,
        } => format!("modular_bound(t={t}, B={b}, i={i}, alpha={alpha}, M*=n'^{m_star_power})"),
        Formula::RatioBetweenTwoAndFour { t_max, extra } => {
            format!("2 < ratio < 4 for t <= {t_max}, n <= 3t+1+{extra}")
        }
    }
}

pub fn run_check(check: &Check) -> CheckOutcome {
    let label = label(&check.formula);
    if let Formula::RatioBetweenTwoAndFour { t_max, extra } = check.formula {
        let two = Rational::from_integer(2);
        let four = Rational::from_integer(4);
        let mut points = 0;
        let mut bad = Vec::new();
        for t in 1..=t_max {
            for n in 3 * t + 1..=3 * t + 1 + extra {
                points += 1;
                let r = cost_ratio(n, t).expect("n >= 3t + 1");
                if !(r > two && r < four) {
                    bad.push(format!("(n={n}, t={t}) -> {r}"));
                }
            }
        }
        let value = if bad.is_empty() {
            format!("{points} points inside")
        } else {
            format!("outside: {}", bad.join(", "))
        };
        return CheckOutcome {
            label,
            value,
            ok: bad.is_empty(),
        };
    }
    match eval(&check.formula) {
        Ok(v) => {
            let ok = match &check.expected {
                None => true,
                Some(e) => parse_rational(e).map(|e| e == v).unwrap_or(false),
            };
            let value = match &check.expected {
                Some(e) if !ok => format!("{v} (expected {e})"),
                _ => v.to_string(),
            };
            CheckOutcome { label, value, ok }
        }
        Err(e) => CheckOutcome {
            label,
            value: e.to_string(),
            ok: false,
        },
    }
}

/// The hand-computed reference values.
pub fn builtin_checks() -> Vec<Check> {
    let exact = |formula, expected: &str| Check {
        formula,
        expected: Some(expected.to_string()),
    };
    let modular = |i, expected| {
        exact(
            Formula::ModularBound {
                t: 4,
                b: 2,
                i,
                alpha: "1".into(),
                m_star_power: 3,
            },
            expected,
        )
    };
    vec![
        exact(Formula::DetectableCostBits { n: 4, t: 1, d: 6 }, "15"),
        exact(Formula::DetectableCostBits { n: 7, t: 2, d: 9 }, "27"),
        exact(Formula::DetectableCostBits { n: 5, t: 0, d: 10 }, "18"),
        exact(Formula::TotalBbCostBits { n: 4, t: 1, l: 12 }, "30"),
        exact(Formula::TotalBbCostBits { n: 7, t: 2, l: 18 }, "54"),
        exact(Formula::TotalBbCostBits { n: 4, t: 1, l: 1 }, "5/2"),
        exact(Formula::StaticDbLowerBoundBits { n: 4, f: 1, l: 6 }, "12"),
        exact(Formula::StaticDbLowerBoundBits { n: 7, f: 2, l: 10 }, "22"),
        exact(Formula::MessageLowerBound { t: 0 }, "1"),
        exact(Formula::MessageLowerBound { t: 1 }, "2"),
        exact(Formula::MessageLowerBound { t: 5 }, "6"),
        modular(0, "2197"),
        modular(1, "694"),
        modular(2, "272"),
        Check {
            formula: Formula::RatioBetweenTwoAndFour { t_max: 5, extra: 9 },
            expected: None,
        },
    ]
}

/// Parses `builtin`, a JSON list of checks, or a path to such a file.
pub fn load_checks(arg: &str) -> anyhow::Result<Vec<Check>> {
    if arg == "builtin" {
        return Ok(builtin_checks());
    }
    let text = if arg.trim_start().starts_with('[') || arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)?
    };
    let value: serde_json::Value = serde_json::from_str(&text)?;
    Ok(if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    })
}
