//! Spherical-harmonic gravity field in a body-fixed frame.
//!
//! Coefficients are stored fully normalised, as read from file, and
//! converted once to unnormalised form for the acceleration recursion.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Positions closer to the centre than this fraction of the reference
/// radius are rejected.
const SURFACE_GUARD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct GravityModel {
    pub mu: f64,
    pub r_ref: f64,
    pub degree: usize,
    /// Normalised `(C̄nm, S̄nm)` keyed by `(n, m)`.
    pub coeffs: BTreeMap<(usize, usize), (f64, f64)>,
    c: Vec<Vec<f64>>,
    s: Vec<Vec<f64>>,
}

/// Normalisation `N_nm = √((2 − δ_m0)(2n + 1)(n − m)!/(n + m)!)`.
fn normalisation(n: usize, m: usize) -> f64 {
    let mut ratio = 1.0;
    for k in (n - m + 1)..=(n + m) {
        ratio /= k as f64;
    }
    let delta = if m == 0 { 1.0 } else { 2.0 };
    (delta * (2 * n + 1) as f64 * ratio).sqrt()
}

impl GravityModel {
    pub fn new(
        mu: f64,
        r_ref: f64,
        degree: usize,
        coeffs: BTreeMap<(usize, usize), (f64, f64)>,
    ) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be positive, got {mu}")));
        }
        if !(r_ref > 0.0 && r_ref.is_finite()) {
            return Err(Error::invalid(format!("r_ref must be positive, got {r_ref}")));
        }
        for (&(n, m), &(cb, sb)) in &coeffs {
            if m > n || n > degree {
                return Err(Error::invalid(format!(
                    "coefficient ({n}, {m}) outside 0 <= m <= n <= {degree}"
                )));
            }
            if !cb.is_finite() || !sb.is_finite() {
                return Err(Error::invalid(format!("coefficient ({n}, {m}) is not finite")));
            }
        }
        if let Some(&(c00, _)) = coeffs.get(&(0, 0)) {
            if c00 != 1.0 {
                return Err(Error::invalid(format!("C00 must be 1, got {c00}")));
            }
        }
        let mut c = vec![vec![0.0; degree + 1]; degree + 1];
        let mut s = vec![vec![0.0; degree + 1]; degree + 1];
        for (&(n, m), &(cb, sb)) in &coeffs {
            let f = normalisation(n, m);
            c[n][m] = cb * f;
            s[n][m] = sb * f;
        }
        Ok(Self {
            mu,
            r_ref,
            degree,
            coeffs,
            c,
            s,
        })
    }

    pub fn point_mass(mu: f64, r_ref: f64) -> Result<Self> {
        Self::new(mu, r_ref, 0, BTreeMap::new())
    }

    /// Parses `mu <v> r_ref <v> degree <n>` followed by `n m Cbar Sbar` lines.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = None;
        let mut coeffs = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_f = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("expected a number, found {s:?}"),
                })
            };
            let parse_u = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("expected a non-negative integer, found {s:?}"),
                })
            };
            match header {
                None => {
                    if fields.len() != 6
                        || fields[0] != "mu"
                        || fields[2] != "r_ref"
                        || fields[4] != "degree"
                    {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "expected header `mu <value> r_ref <value> degree <n>`".into(),
                        });
                    }
                    header = Some((parse_f(fields[1])?, parse_f(fields[3])?, parse_u(fields[5])?));
                }
                Some((_, _, degree)) => {
                    if fields.len() != 4 {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("expected `n m Cbar Sbar`, found {} fields", fields.len()),
                        });
                    }
                    let (n, m) = (parse_u(fields[0])?, parse_u(fields[1])?);
                    if m > n || n > degree {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("coefficient ({n}, {m}) outside 0 <= m <= n <= {degree}"),
                        });
                    }
                    if coeffs
                        .insert((n, m), (parse_f(fields[2])?, parse_f(fields[3])?))
                        .is_some()
                    {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("duplicate coefficient ({n}, {m})"),
                        });
                    }
                }
            }
        }
        let (mu, r_ref, degree) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing header".into(),
        })?;
        Self::new(mu, r_ref, degree, coeffs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Drops every term above `degree`.
    pub fn truncated(&self, degree: usize) -> Result<Self> {
        if degree > self.degree {
            return Err(Error::invalid(format!(
                "requested degree {degree} exceeds the model's {}",
                self.degree
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&(n, _), _)| n <= degree)
            .map(|(&k, &v)| (k, v))
            .collect();
        Self::new(self.mu, self.r_ref, degree, coeffs)
    }

    /// Same model with one normalised coefficient pair replaced.
    pub fn with_coefficient(&self, n: usize, m: usize, cbar: f64, sbar: f64) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs.insert((n, m), (cbar, sbar));
        Self::new(self.mu, self.r_ref, self.degree, coeffs)
    }

    fn guard(&self, q: &[f64; 3]) -> Result<f64> {
        let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        if !(r > SURFACE_GUARD * self.r_ref) {
            return Err(Error::domain(
                f64::NAN,
                q,
                format!("|q| = {r} is below {SURFACE_GUARD} r_ref"),
            ));
        }
        Ok(r)
    }
}

/// Acceleration `−∇U` at body-fixed position `q`, by the Cunningham
/// recursion for the solid harmonics `V_nm`, `W_nm`. The central term is
/// evaluated directly as `−μ q / |q|³`.
pub fn gravity_accel(model: &GravityModel, q: &[f64; 3]) -> Result<[f64; 3]> {
    let r = model.guard(q)?;
    let r3 = r * r * r;
    let mut acc = [
        -model.mu * q[0] / r3,
        -model.mu * q[1] / r3,
        -model.mu * q[2] / r3,
    ];
    let nmax = model.degree;
    if nmax == 0 {
        return Ok(acc);
    }

    let big_r = model.r_ref;
    let r2 = r * r;
    let rho = big_r * big_r / r2;
    let (x0, y0, z0) = (big_r * q[0] / r2, big_r * q[1] / r2, big_r * q[2] / r2);
    let size = nmax + 2;
    let mut v = vec![vec![0.0; size + 1]; size + 1];
    let mut w = vec![vec![0.0; size + 1]; size + 1];
    v[0][0] = big_r / r;
    for m in 0..=size {
        if m > 0 {
            let f = (2 * m - 1) as f64;
            v[m][m] = f * (x0 * v[m - 1][m - 1] - y0 * w[m - 1][m - 1]);
            w[m][m] = f * (x0 * w[m - 1][m - 1] + y0 * v[m - 1][m - 1]);
        }
        if m < size {
            let f = (2 * m + 1) as f64 * z0;
            v[m + 1][m] = f * v[m][m];
            w[m + 1][m] = f * w[m][m];
        }
        for n in (m + 2)..=size {
            let a = (2 * n - 1) as f64 * z0;
            let b = (n + m - 1) as f64 * rho;
            let d = (n - m) as f64;
            v[n][m] = (a * v[n - 1][m] - b * v[n - 2][m]) / d;
            w[n][m] = (a * w[n - 1][m] - b * w[n - 2][m]) / d;
        }
    }

    let scale = model.mu / (big_r * big_r);
    for n in 1..=nmax {
        for m in 0..=n {
            let (c, s) = (model.c[n][m], model.s[n][m]);
            let (ax, ay, az);
            if m == 0 {
                ax = -c * v[n + 1][1];
                ay = -c * w[n + 1][1];
                az = (n + 1) as f64 * (-c * v[n + 1][0]);
            } else {
                let fac = 0.5 * ((n - m + 1) * (n - m + 2)) as f64;
                ax = 0.5 * (-c * v[n + 1][m + 1] - s * w[n + 1][m + 1])
                    + fac * (c * v[n + 1][m - 1] + s * w[n + 1][m - 1]);
                ay = 0.5 * (-c * w[n + 1][m + 1] + s * v[n + 1][m + 1])
                    + fac * (-c * w[n + 1][m - 1] + s * v[n + 1][m - 1]);
                az = (n - m + 1) as f64 * (-c * v[n + 1][m] - s * w[n + 1][m]);
            }
            acc[0] += scale * ax;
            acc[1] += scale * ay;
            acc[2] += scale * az;
        }
    }
    Ok(acc)
}

/// Potential energy per unit mass `U(q)` (negative, `a = −∇U`), summed in
/// spherical coordinates with fully normalised Legendre functions.
pub fn gravity_potential(model: &GravityModel, q: &[f64; 3]) -> Result<f64> {
    let r = model.guard(q)?;
    let nmax = model.degree;
    let sin_phi = q[2] / r;
    let cos_phi = (q[0] * q[0] + q[1] * q[1]).sqrt() / r;
    let lambda = q[1].atan2(q[0]);

    let mut p = vec![vec![0.0; nmax + 1]; nmax + 1];
    p[0][0] = 1.0;
    for m in 0..=nmax {
        if m == 1 {
            p[1][1] = 3f64.sqrt() * cos_phi;
        } else if m > 1 {
            let mf = m as f64;
            p[m][m] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * cos_phi * p[m - 1][m - 1];
        }
        if m < nmax {
            p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * sin_phi * p[m][m];
        }
        for n in (m + 2)..=nmax {
            let (nf, mf) = (n as f64, m as f64);
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0).powi(2) - mf * mf) / (4.0 * (nf - 1.0).powi(2) - 1.0)).sqrt();
            p[n][m] = a * (sin_phi * p[n - 1][m] - b * p[n - 2][m]);
        }
    }

    let mut sum = 1.0;
    let ratio = model.r_ref / r;
    let mut rn = 1.0;
    for n in 1..=nmax {
        rn *= ratio;
        let mut inner = 0.0;
        for m in 0..=n {
            if let Some(&(cb, sb)) = model.coeffs.get(&(n, m)) {
                let ml = m as f64 * lambda;
                inner += p[n][m] * (cb * ml.cos() + sb * ml.sin());
            }
        }
        sum += rn * inner;
    }
    Ok(-model.mu / r * sum)
}
