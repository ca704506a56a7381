//! CSV serialization. Floats are written with 17 significant digits so a
//! parse recovers them bit for bit; metadata lines start with '#'.

use std::io::Write;

use super::{GrowthReport, GrowthRow, RunMeta, SmoothingReport, SmoothingRow};
use crate::error::{Error, Result};
use crate::gauge::Trajectory;

pub const SMOOTHING_HEADER: &str = "t,gamma,norm_w,slope_u,slope_w,gamma_fit";
pub const GROWTH_HEADER: &str = "t,hs_norm,window_n,low_norm,high_norm";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_meta<W: Write>(out: &mut W, kind: &str, meta: &RunMeta) -> Result<()> {
    writeln!(out, "# kind = {kind}")?;
    writeln!(out, "# cutoff = {}", meta.cutoff)?;
    writeln!(out, "# dt = {}", num(meta.dt))?;
    writeln!(out, "# horizon = {}", num(meta.horizon))?;
    writeln!(out, "# seed = {}", meta.seed)?;
    writeln!(out, "# p = {}", meta.p)?;
    Ok(())
}

pub fn write_smoothing_csv<W: Write>(report: &SmoothingReport, mut out: W) -> Result<()> {
    write_meta(&mut out, "smoothing", &report.meta)?;
    writeln!(out, "# s = {}", num(report.s))?;
    let grid: Vec<String> = report.gammas.iter().map(|&g| num(g)).collect();
    writeln!(out, "# gammas = {}", grid.join(" "))?;
    writeln!(out, "# gamma_fit = {}", num(report.gamma_fit))?;
    writeln!(out, "{SMOOTHING_HEADER}")?;
    for row in &report.rows {
        for (g, n) in report.gammas.iter().zip(&row.norms) {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                num(row.t),
                num(*g),
                num(*n),
                num(row.slope_u),
                num(row.slope_w),
                num(report.gamma_fit)
            )?;
        }
    }
    Ok(())
}

pub fn write_growth_csv<W: Write>(report: &GrowthReport, mut out: W) -> Result<()> {
    write_meta(&mut out, "growth", &report.meta)?;
    writeln!(out, "# s = {}", num(report.s))?;
    writeln!(out, "# window = {}", num(report.window))?;
    writeln!(out, "# ceiling = {}", num(report.ceiling))?;
    writeln!(out, "# mass_drift = {}", num(report.mass_drift))?;
    writeln!(out, "# hamiltonian_drift = {}", num(report.hamiltonian_drift))?;
    writeln!(out, "{GROWTH_HEADER}")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            num(r.t),
            num(r.hs_norm),
            r.window_n,
            num(r.low_norm),
            num(r.high_norm)
        )?;
    }
    writeln!(out, "# alpha_fit = {}", num(report.alpha))?;
    Ok(())
}

/// Long format: one line per (t, k) with k = 1..N; c_{-k} is the conjugate.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    writeln!(out, "t,k,re,im")?;
    for (t, u) in traj.times().iter().zip(traj.states()) {
        for (c, k) in u.positive_modes().iter().zip(1..) {
            writeln!(out, "{},{k},{},{}", num(*t), num(c.re), num(c.im))?;
        }
    }
    Ok(())
}

pub fn write_diagnostics_csv<W: Write>(traj: &Trajectory, s_list: &[f64], mut out: W) -> Result<()> {
    let mut header = String::from("t,mass,hamiltonian");
    for s in s_list {
        header.push_str(&format!(",hs_{s}"));
    }
    header.push_str(",phase");
    writeln!(out, "{header}")?;
    for i in 0..traj.len() {
        let d = traj.diagnostics()[i];
        let mut line = format!("{},{},{}", num(traj.times()[i]), num(d.mass), num(d.hamiltonian));
        for &s in s_list {
            line.push(',');
            line.push_str(&num(traj.states()[i].sobolev_norm(s)));
        }
        line.push(',');
        line.push_str(&num(traj.phase()[i]));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

struct Parsed<'a> {
    meta: Vec<(&'a str, &'a str)>,
    header: Option<&'a str>,
    rows: Vec<Vec<&'a str>>,
}

impl<'a> Parsed<'a> {
    fn new(text: &'a str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut header = None;
        let mut rows = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad metadata line {line:?}")))?;
                meta.push((k.trim(), v.trim()));
            } else if header.is_none() {
                header = Some(line);
            } else {
                rows.push(line.split(',').collect());
            }
        }
        Ok(Parsed { meta, header, rows })
    }

    fn get(&self, key: &str) -> Result<&'a str> {
        self.meta
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Parse(format!("missing metadata {key}")))
    }

    fn float(&self, key: &str) -> Result<f64> {
        parse_f64(self.get(key)?)
    }

    fn expect(&self, kind: &str, header: &str) -> Result<()> {
        if self.get("kind")? != kind {
            return Err(Error::Parse(format!("not a {kind} report")));
        }
        if self.header != Some(header) {
            return Err(Error::Parse(format!("expected header {header:?}")));
        }
        let width = header.split(',').count();
        if let Some(r) = self.rows.iter().find(|r| r.len() != width) {
            return Err(Error::Parse(format!("row has {} fields, expected {width}", r.len())));
        }
        Ok(())
    }

    fn meta(&self) -> Result<RunMeta> {
        Ok(RunMeta {
            cutoff: parse_int(self.get("cutoff")?)?,
            dt: self.float("dt")?,
            horizon: self.float("horizon")?,
            seed: parse_int(self.get("seed")?)?,
            p: self.get("p")?.to_string(),
        })
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

pub fn parse_smoothing_csv(text: &str) -> Result<SmoothingReport> {
    let doc = Parsed::new(text)?;
    doc.expect("smoothing", SMOOTHING_HEADER)?;
    let gammas = doc
        .get("gammas")?
        .split_whitespace()
        .map(parse_f64)
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    if !gammas.is_empty() {
        if doc.rows.len() % gammas.len() != 0 {
            return Err(Error::Parse("row count is not a multiple of the gamma grid".into()));
        }
        for chunk in doc.rows.chunks(gammas.len()) {
            let t = parse_f64(chunk[0][0])?;
            let mut norms = Vec::with_capacity(gammas.len());
            for (line, g) in chunk.iter().zip(&gammas) {
                if parse_f64(line[0])?.to_bits() != t.to_bits() || parse_f64(line[1])?.to_bits() != g.to_bits() {
                    return Err(Error::Parse(format!("rows for t = {t} out of order")));
                }
                norms.push(parse_f64(line[2])?);
            }
            rows.push(SmoothingRow {
                t,
                norms,
                slope_u: parse_f64(chunk[0][3])?,
                slope_w: parse_f64(chunk[0][4])?,
            });
        }
    }
    Ok(SmoothingReport {
        meta: doc.meta()?,
        s: doc.float("s")?,
        gammas,
        rows,
        gamma_fit: doc.float("gamma_fit")?,
    })
}

pub fn parse_growth_csv(text: &str) -> Result<GrowthReport> {
    let doc = Parsed::new(text)?;
    doc.expect("growth", GROWTH_HEADER)?;
    let rows = doc
        .rows
        .iter()
        .map(|r| {
            Ok(GrowthRow {
                t: parse_f64(r[0])?,
                hs_norm: parse_f64(r[1])?,
                window_n: parse_int(r[2])?,
                low_norm: parse_f64(r[3])?,
                high_norm: parse_f64(r[4])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrowthReport {
        meta: doc.meta()?,
        s: doc.float("s")?,
        window: doc.float("window")?,
        rows,
        alpha: doc.float("alpha_fit")?,
        ceiling: doc.float("ceiling")?,
        mass_drift: doc.float("mass_drift")?,
        hamiltonian_drift: doc.float("hamiltonian_drift")?,
    })
}
