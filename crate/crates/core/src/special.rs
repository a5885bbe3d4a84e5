//! Bessel functions of real order and the gamma function.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

// Taylor coefficients of 1/Γ(z) about 0, c[k] multiplies z^k.
const RGAMMA: [f64; 30] = [
    0.0,
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
];

/// Γ₁, Γ₂ of Temme's method plus 1/Γ(1+μ), 1/Γ(1−μ), for |μ| ≤ 1/2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+μ) = Σ_k c[k+1] μ^k ; split into even and odd parts
    let mut even = 0.0;
    let mut odd = 0.0;
    let m2 = mu * mu;
    let mut pw = 1.0;
    for k in 0..14 {
        even += RGAMMA[2 * k + 1] * pw;
        odd += RGAMMA[2 * k + 2] * pw;
        pw *= m2;
    }
    let g1 = -odd;
    let g2 = even;
    (g1, g2, g2 - mu * g1, g2 + mu * g1)
}

/// (J_ν, Y_ν, J'_ν, Y'_ν) for ν ≥ 0, x > 0 (Temme series below x = 2, Steed's method above).
fn jy_nonneg(nu: f64, x: f64) -> (f64, f64, f64, f64) {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;
    const XMIN: f64 = 2.0;
    let nl = if x < XMIN { (nu + 0.5) as i64 } else { ((nu - x + 1.5) as i64).max(0) };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;
    // continued fraction for J'_ν/J_ν
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..1_000_000 {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let t = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * t - rjl;
        rjl = t;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;
    let (rjmu, mut rymu, mut ry1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut i = 1.0;
        loop {
            ff = (i * ff + p + q) / (i * i - xmu2);
            c *= d / i;
            p /= i - xmu;
            q /= i + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - i * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS || i > 500.0 {
                break;
            }
            i += 1.0;
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        for i in 2..1_000_000 {
            a += (2 * (i - 1)) as f64;
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                break;
            }
        }
        let gam = (p - f) / q;
        let m = (w / ((p - f) * gam + q)).sqrt();
        rjmu = m.copysign(rjl);
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }
    let fact = rjmu / rjl;
    let rj = rjl1 * fact;
    let rjp = rjp1 * fact;
    for i in 1..=nl {
        let t = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = t;
    }
    let ryp = nu * xi * rymu - ry1;
    (rj, rymu, rjp, ryp)
}

/// Hankel asymptotic expansion, accurate for x ≥ 25 and small orders.
fn jy_hankel(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (0.0, 0.0);
    let mut t = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let m = (2 * k - 1) as f64;
            t *= (mu - m * m) / (8.0 * k as f64 * x);
        }
        if t.abs() > last || t == 0.0 {
            break;
        }
        // P takes even k with alternating sign, Q odd k
        match k % 4 {
            0 => p += t,
            1 => q += t,
            2 => p -= t,
            _ => q -= t,
        }
        last = t.abs();
        if last < 1e-18 {
            break;
        }
    }
    // ω = x − c with c = (ν/2 + 1/4)π; expand sin/cos of the difference to keep x exact
    let c = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sc, cc) = c.sin_cos();
    let sw = sx * cc - cx * sc;
    let cw = cx * cc + sx * sc;
    let a = (2.0 / (PI * x)).sqrt();
    (a * (p * cw - q * sw), a * (p * sw + q * cw))
}

const HANKEL_MIN: f64 = 25.0;

/// J_ν(x) and Y_ν(x) for ν ≥ −1 and x > 0. Negative orders use the reflection formulas.
pub fn bessel_jy(nu: f64, x: f64) -> Result<(f64, f64)> {
    let (j, y, _, _) = bessel_jy_d(nu, x)?;
    Ok((j, y))
}

/// (J_ν, Y_ν, J'_ν, Y'_ν).
pub fn bessel_jy_d(nu: f64, x: f64) -> Result<(f64, f64, f64, f64)> {
    if !(nu >= -1.0) || !nu.is_finite() {
        return Err(Error::DomainError(format!("order {nu} outside [-1, inf)")));
    }
    if !(x > 0.0) {
        return Err(Error::DomainError(format!("Bessel argument {x} must be positive")));
    }
    if x >= HANKEL_MIN && nu <= 4.0 {
        let (j, y) = jy_hankel(nu, x);
        let (jm, ym) = jy_hankel(nu - 1.0, x);
        return Ok((j, y, jm - nu / x * j, ym - nu / x * y));
    }
    if nu >= 0.0 {
        return Ok(jy_nonneg(nu, x));
    }
    let mu = -nu;
    let (j, y, jp, yp) = jy_nonneg(mu, x);
    let (s, c) = (mu * PI).sin_cos();
    Ok((c * j - s * y, s * j + c * y, c * jp - s * yp, s * jp + c * yp))
}

/// J_ν(x) including x = 0.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    bessel_jy(nu, x).map(|v| v.0).unwrap_or(f64::NAN)
}

pub fn bessel_y(nu: f64, x: f64) -> Result<f64> {
    bessel_jy(nu, x).map(|v| v.1)
}

/// Value and first two derivatives of a cylinder function Z_ν(k r) with respect to r.
/// `which` selects J (false) or Y (true).
pub fn cylinder_r(nu: f64, k: f64, r: f64, y: bool) -> Result<[f64; 3]> {
    let z = k * r;
    let (j, yv, jp, yp) = bessel_jy_d(nu, z)?;
    let (f, fp) = if y { (yv, yp) } else { (j, jp) };
    // Z'' = −Z'/z − (1 − ν²/z²) Z
    let fpp = -fp / z - (1.0 - nu * nu / (z * z)) * f;
    Ok([f, k * fp, k * k * fpp])
}
