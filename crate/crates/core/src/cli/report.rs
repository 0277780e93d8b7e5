//! Report JSON (schema 1) and the plain-text renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::AnalysisReport;
use crate::measure::{AtomSet, AtomicMeasureSpace};
use crate::rational::{format_rational, Rational};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct AnalyzeJson {
    pub schema: u32,
    pub command: &'static str,
    pub scenario: Option<String>,
    pub atoms: Vec<String>,
    pub weights: Vec<String>,
    pub nonsingular: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_witness: Option<WitnessJson>,
    pub measure_preserving: bool,
    pub expansive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pushforward: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rn_derivative: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injective: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub essentially_surjective: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ascent: Option<AscentJson>,
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub preimage: String,
    pub atom: String,
}

#[derive(Debug, Serialize)]
pub struct KernelJson {
    pub omega0: Vec<String>,
    pub kernel_dimension: usize,
    pub is_zero_operator: bool,
}

#[derive(Debug, Serialize)]
pub struct AscentJson {
    pub ascent: usize,
    pub stabilized_zero_set: Vec<String>,
    pub certificate: Vec<Vec<String>>,
}

fn ids(space: &AtomicMeasureSpace, set: &AtomSet) -> Vec<String> {
    set.iter().map(|&a| space.atoms()[a].clone()).collect()
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

impl AnalyzeJson {
    pub fn new(name: Option<String>, space: &AtomicMeasureSpace, report: &AnalysisReport) -> Self {
        AnalyzeJson {
            schema: SCHEMA_VERSION,
            command: "analyze",
            scenario: name,
            atoms: space.atoms().to_vec(),
            weights: rationals(space.weights()),
            nonsingular: report.nonsingular.holds(),
            singular_witness: report.nonsingular.witness.map(|w| WitnessJson {
                preimage: space.atoms()[w.preimage].clone(),
                atom: space.atoms()[w.atom].clone(),
            }),
            measure_preserving: report.measure_preserving,
            expansive: report.expansive,
            pushforward: report.pushforward.as_ref().map(|m| rationals(&m.weights)),
            rn_derivative: report.rn_derivative.as_ref().map(|d| rationals(&d.values)),
            kernel: report.kernel.as_ref().map(|k| KernelJson {
                omega0: ids(space, &k.omega0),
                kernel_dimension: k.kernel_dimension,
                is_zero_operator: k.is_zero_operator,
            }),
            injective: report.injective,
            essentially_surjective: report.essentially_surjective,
            ascent: report.ascent.as_ref().map(|a| AscentJson {
                ascent: a.ascent,
                stabilized_zero_set: ids(space, &a.stabilized_zero_set),
                certificate: a.certificate.iter().map(|s| ids(space, s)).collect(),
            }),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

pub fn analyze_text(json: &AnalyzeJson) -> String {
    let mut out = String::new();
    let w = &mut out;
    if let Some(name) = &json.scenario {
        let _ = writeln!(w, "scenario: {name}");
    }
    let _ = writeln!(w, "atoms: [{}]", json.atoms.join(", "));
    let _ = writeln!(w, "weights: [{}]", json.weights.join(", "));
    let _ = writeln!(w, "nonsingular: {}", yes_no(json.nonsingular));
    if let Some(wit) = &json.singular_witness {
        let _ = writeln!(
            w,
            "  witness: atom {} has positive weight and maps to null atom {}",
            wit.preimage, wit.atom
        );
    }
    let _ = writeln!(w, "measure preserving: {}", yes_no(json.measure_preserving));
    let _ = writeln!(w, "expansive: {}", yes_no(json.expansive));
    if let Some(mu1) = &json.pushforward {
        let _ = writeln!(w, "pushforward mu_1: [{}]", mu1.join(", "));
    }
    if let Some(f) = &json.rn_derivative {
        let _ = writeln!(w, "rn derivative f_T: [{}]", f.join(", "));
    }
    if let Some(k) = &json.kernel {
        let _ = writeln!(
            w,
            "kernel: Omega_0 = {} (dimension {}){}",
            braces(&k.omega0),
            k.kernel_dimension,
            if k.is_zero_operator { ", zero operator" } else { "" }
        );
    }
    if let (Some(inj), Some(surj)) = (json.injective, json.essentially_surjective) {
        let _ = writeln!(w, "injective: {}", yes_no(inj));
        let _ = writeln!(w, "essentially surjective: {}", yes_no(surj));
    }
    if let Some(a) = &json.ascent {
        let _ = writeln!(w, "ascent: {}", a.ascent);
        let chain: Vec<String> = a
            .certificate
            .iter()
            .enumerate()
            .map(|(i, s)| format!("Omega_{} = {}", i + 1, braces(s)))
            .collect();
        let _ = writeln!(w, "zero-set chain: {}", chain.join(", "));
    }
    if !json.nonsingular {
        let _ = writeln!(w, "theorem fields omitted: transformation is singular");
    }
    out
}

/// `v` with 12 significant digits in fixed notation (scientific outside
/// `1e-5 ..= 1e12`).
pub fn sig12(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let render = |exp: i32| -> Option<String> {
        let decimals = DIGITS - 1 - exp;
        (decimals >= 0).then(|| format!("{:.*}", decimals as usize, v))
    };
    let exp = v.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        return format!("{:.*e}", (DIGITS - 1) as usize, v);
    }
    let s = render(exp).unwrap_or_else(|| format!("{v:.0}"));
    // rounding may have carried into a new leading digit
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    let significant = digits.trim_start_matches('0').len();
    if significant > DIGITS as usize {
        render(exp + 1).unwrap_or(s)
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(3.0), "3.00000000000");
        assert_eq!(sig12(0.0), "0.00000000000");
        assert_eq!(sig12(1.0 + 1.0 / 3.0f64.sqrt()), "1.57735026919");
        assert_eq!(sig12(123.456), "123.456000000");
        assert_eq!(sig12(0.001234), "0.00123400000000");
        assert_eq!(sig12(9.9999999999999), "10.0000000000");
        assert_eq!(sig12(-2.5), "-2.50000000000");
        assert_eq!(sig12(1e13), "1.00000000000e13");
    }
}
