//! CSV and JSON output.
//!
//! Floating values in CSV are printed like C's `%.12g`: 12 significant
//! digits, trailing zeros removed, `.` as the decimal separator.

use std::io::Write;

use erw_core::coupled::CoupledState;
use erw_core::enumerate::EnumerationResult;
use erw_core::moments::MomentTable;
use erw_core::variance::FigureRow;
use erw_core::word::Letter;
use erw_core::MemoryParams;
use serde::Serialize;

use crate::{HarnessError, Result};

const SIG_DIGITS: i32 = 12;

/// `%.12g`.
pub fn format_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG_DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let fixed = format!("{:.*}", (SIG_DIGITS - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn letter_name(g: Letter) -> &'static str {
    match g {
        Letter::A => "a",
        Letter::B => "b",
    }
}

/// Full path dump with header `n,letter,W,S,Xi,Ztilde,QV`, starting from
/// the `n = 0` row.
pub fn write_trace_csv<W: Write>(out: W, params: MemoryParams, letters: &[Letter]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "letter", "W", "S", "Xi", "Ztilde", "QV"])?;
    let mut st = CoupledState::new(params);
    let row = |st: &CoupledState, letter: &str| {
        [
            st.n().to_string(),
            letter.to_string(),
            st.w().to_string(),
            st.s().to_string(),
            format_g12(st.xi()),
            format_g12(st.ztilde()),
            format_g12(st.qv()),
        ]
    };
    w.write_record(row(&st, ""))?;
    for &g in letters {
        st.advance(g);
        w.write_record(row(&st, letter_name(g)))?;
    }
    w.flush()?;
    Ok(())
}

/// Header `k,H,I,a_k`.
pub fn write_moments_csv<W: Write>(out: W, table: &MomentTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "H", "I", "a_k"])?;
    for r in &table.rows {
        w.write_record([
            r.k.to_string(),
            format_g12(r.h),
            format_g12(r.i),
            format_g12(r.a),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Header `q,var_Z_infinity,abs_err`. Failed rows carry `nan`.
pub fn write_figure_csv<W: Write>(out: W, rows: &[FigureRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "var_Z_infinity", "abs_err"])?;
    for r in rows {
        let (v, e) = match r.failure {
            None => (r.value, r.abs_err),
            Some(_) => (f64::NAN, f64::NAN),
        };
        w.write_record([format_g12(r.q), format_g12(v), format_g12(e)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRecord {
    pub q: f64,
    pub var_z_infinity: Option<f64>,
    pub abs_err: Option<f64>,
    pub error: Option<String>,
}

pub fn figure_records(rows: &[FigureRow]) -> Vec<FigureRecord> {
    rows.iter()
        .map(|r| FigureRecord {
            q: r.q,
            var_z_infinity: r.failure.is_none().then_some(r.value),
            abs_err: r.failure.is_none().then_some(r.abs_err),
            error: r.failure.as_ref().map(|e| e.to_string()),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRecord {
    pub k: u64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "I")]
    pub i: f64,
    pub a_k: f64,
}

pub fn moment_records(table: &MomentTable) -> Vec<MomentRecord> {
    table
        .rows
        .iter()
        .map(|r| MomentRecord {
            k: r.k,
            h: r.h,
            i: r.i,
            a_k: r.a,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SProbability {
    pub s: i64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct EnumerationRecord {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub prob_sum: f64,
    pub E_W2: f64,
    pub E_S: f64,
    pub E_S2: f64,
    /// `E[Z̃_{n+1}²]`.
    pub E_Ztilde2: f64,
    pub E_W2_by_step: Vec<f64>,
    pub E_Ztilde2_by_step: Vec<f64>,
    pub S_distribution: Vec<SProbability>,
    pub coupling_ok: bool,
    pub max_martingale_defect: f64,
}

impl EnumerationRecord {
    pub fn new(params: &MemoryParams, r: &EnumerationResult) -> Self {
        let n = r.n as i64;
        Self {
            n: r.n,
            p: params.p(),
            q: r.q,
            prob_sum: r.prob_sum,
            E_W2: r.e_w2,
            E_S: r.e_s,
            E_S2: r.e_s2,
            E_Ztilde2: r.e_ztilde2,
            E_W2_by_step: r.w2_by_step.clone(),
            E_Ztilde2_by_step: r.ztilde2_by_step.clone(),
            S_distribution: r
                .s_distribution
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &prob)| SProbability {
                    s: i as i64 - n,
                    prob,
                })
                .collect(),
            coupling_ok: r.coupling_ok,
            max_martingale_defect: r.max_martingale_defect,
        }
    }
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

/// `{"error": {"kind": …, "message": …}}` on one line.
pub fn error_record(err: &HarnessError) -> String {
    let rec = ErrorRecord {
        error: ErrorBody {
            kind: err.kind(),
            message: err.to_string(),
        },
    };
    serde_json::to_string(&rec).expect("error record serializes")
}
