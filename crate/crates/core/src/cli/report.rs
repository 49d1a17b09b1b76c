use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use super::scenario::Scenario;
use crate::config::SolverOptions;
use crate::discriminator::{self, Diagnostics, DualCertificate, KktResiduals, Solution, SolverPath};
use crate::ensemble::Ensemble;
use crate::error::Result;
use crate::oracles::{self, MatrixResiduals};
use crate::bloch::Povm;

pub const GRID_STEP: f64 = 1e-2;
pub const SUBGRADIENT_ITERS: usize = 1_000_000;
pub const SUBGRADIENT_TOL: f64 = 1e-6;

/// Pretty JSON with every float written as `d.dddddddddddddddde±x`.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17 significant digits, enough to round-trip any `f64`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the input document.
    pub input_hash: String,
    pub solver_path: SolverPath,
    pub seed: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub grid_step: f64,
    pub grid_value: f64,
    pub subgradient_iterations: usize,
    pub subgradient_seed: u64,
    pub subgradient_value: f64,
    pub primal_value: f64,
    pub matrix: MatrixResiduals,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub p_guess: f64,
    pub certificate: DualCertificate,
    pub povm: Povm,
    pub support: Vec<usize>,
    pub residuals: KktResiduals,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    pub provenance: Provenance,
}

impl Report {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))
    }

    /// False only when an oracle section is present and disagrees.
    pub fn passed(&self) -> bool {
        self.oracle.as_ref().is_none_or(|o| o.passed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs every oracle against `sol`.
pub fn certify(e: &Ensemble, sol: &Solution, opts: &SolverOptions) -> Result<OracleReport> {
    let grid_value = oracles::grid_dual(e, GRID_STEP);
    let subgradient_value = oracles::subgradient_dual(e, SUBGRADIENT_ITERS, opts.seed);
    let primal_value = discriminator::primal_value(e, &sol.povm, opts)?;
    let matrix = oracles::matrix_check(e, sol);
    let p = sol.p_guess;
    let passed = grid_value >= p - 1e-12
        && grid_value <= p + GRID_STEP
        && (subgradient_value - p).abs() <= SUBGRADIENT_TOL
        && (primal_value - p).abs() <= opts.tol.cert
        && matrix.max() <= opts.tol.cert;
    Ok(OracleReport {
        grid_step: GRID_STEP,
        grid_value,
        subgradient_iterations: SUBGRADIENT_ITERS,
        subgradient_seed: opts.seed,
        subgradient_value,
        primal_value,
        matrix,
        passed,
    })
}

/// Solves a scenario and assembles its report. `input` is the document the
/// provenance hash is taken over.
pub fn build_report(scenario: &Scenario, input: &[u8], opts: &SolverOptions, with_oracles: bool) -> Result<Report> {
    let e = scenario.ensemble()?;
    let sol = discriminator::solve(&e, opts)?;
    let oracle = if with_oracles {
        Some(certify(&e, &sol, opts)?)
    } else {
        None
    };
    Ok(Report {
        name: scenario.name.clone(),
        p_guess: sol.p_guess,
        residuals: sol.certificate.residuals,
        provenance: Provenance {
            input_hash: sha256_hex(input),
            solver_path: sol.diagnostics.path,
            seed: opts.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        certificate: sol.certificate,
        povm: sol.povm,
        support: sol.support,
        diagnostics: sol.diagnostics,
        oracle,
    })
}

#[derive(Serialize)]
struct PovmExport<'a> {
    p_guess: f64,
    support: &'a [usize],
    povm: &'a Povm,
}

pub fn povm_export(report: &Report) -> String {
    to_json(&PovmExport {
        p_guess: report.p_guess,
        support: &report.support,
        povm: &report.povm,
    })
}

/// Flat CSV for external plotting: the given states, the complementary
/// states, the dual center `k` with `k0`, and for equal priors the enclosing
/// ball of the Bloch vectors.
pub fn plot_data(e: &Ensemble, report: &Report) -> String {
    let mut out = String::from("kind,index,x,y,z,scalar\n");
    let row = |out: &mut String, kind: &str, index: Option<usize>, v: [f64; 3], s: f64| {
        let index = index.map(|i| i.to_string()).unwrap_or_default();
        out.push_str(&format!("{kind},{index},{:.16e},{:.16e},{:.16e},{s:.16e}\n", v[0], v[1], v[2]));
    };
    for (x, (st, q)) in e.states().iter().zip(e.priors()).enumerate() {
        row(&mut out, "state", Some(x), st.bloch().to_array(), *q);
    }
    for (x, c) in report.certificate.complementary.iter().enumerate() {
        row(&mut out, "complementary", Some(x), c.u.to_array(), c.r);
    }
    let cert = &report.certificate;
    row(&mut out, "center", None, cert.k.to_array(), cert.k0);
    if report.diagnostics.path == SolverPath::EqualPriorBall {
        let q = e.max_prior();
        let c = cert.k * (1.0 / q);
        row(&mut out, "ball", None, c.to_array(), (cert.k0 - q) / q);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::generate::generate;

    #[test]
    fn floats_keep_every_bit() {
        let values = [0.1, 1.0 / 3.0, -2.5e-300, 5e-324, f64::MAX, 0.0, -0.0, 1.0 - f64::EPSILON];
        let text = to_json(&values);
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits(), "{text}");
        }
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn report_round_trip() {
        let s = generate("random:6:3").unwrap();
        let text = s.to_json();
        let r = build_report(&s, text.as_bytes(), &SolverOptions::default(), false).unwrap();
        let json = r.to_json();
        assert_eq!(Report::from_json(&json).unwrap(), r);
        assert!(!json.contains("oracle"));
    }

    #[test]
    fn certified_pair() {
        let s = generate("pair").unwrap();
        let r = build_report(&s, b"", &SolverOptions::default(), true).unwrap();
        let o = r.oracle.as_ref().unwrap();
        assert!(o.passed);
        assert!((r.p_guess - 1.0).abs() < 1e-15);
        assert!((o.subgradient_value - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn fig1a_plot_rows() {
        let s = generate("fig1a").unwrap();
        let e = s.ensemble().unwrap();
        let r = build_report(&s, b"", &SolverOptions::default(), false).unwrap();
        let csv = plot_data(&e, &r);
        let count = |k: &str| csv.lines().filter(|l| l.starts_with(&format!("{k},"))).count();
        assert_eq!((count("state"), count("complementary"), count("center"), count("ball")), (6, 6, 1, 1));
        let ball = csv.lines().find(|l| l.starts_with("ball,")).unwrap();
        let radius: f64 = ball.rsplit(',').next().unwrap().parse().unwrap();
        assert!((radius - 0.9).abs() < 1e-12);
    }
}
