#![allow(dead_code)]

use ionlaser::{ModelParams, TimeSeries};
use nalgebra::DMatrix;
use num::{BigInt, BigRational, One, Zero};
use num_complex::Complex64;

pub fn fig1() -> ModelParams {
    ModelParams::new(1.0, 0.2, 0.1).unwrap()
}

pub fn fig2() -> ModelParams {
    ModelParams::new(0.2, 1.0, 0.1).unwrap()
}

pub fn sup_diff(a: &TimeSeries, b: &TimeSeries) -> f64 {
    assert_eq!(a.len(), b.len());
    a.pe().zip(b.pe()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// `L_n^(k)(x) = Σ_j (−1)^j C(n+k, n−j) x^j / j!` in exact rational arithmetic.
pub fn laguerre_exact(n: u64, k: u64, x: f64) -> f64 {
    let x = BigRational::from_float(x).expect("finite x");
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    let mut factorial = BigInt::one();
    for j in 0..=n {
        if j > 0 {
            power *= &x;
            factorial *= BigInt::from(j);
        }
        let term = BigRational::from_integer(binomial(n + k, n - j)) * &power
            / BigRational::from_integer(factorial.clone());
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    ratio_to_f64(&sum)
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    // scale to keep 64 significant bits before converting
    let (num, den) = (r.numer(), r.denom());
    let shift = num.bits() as i64 - den.bits() as i64 - 64;
    let scaled = if shift >= 0 {
        num / (den << shift as usize)
    } else {
        (num << (-shift) as usize) / den
    };
    let mantissa: f64 = scaled.to_string().parse().unwrap();
    mantissa * 2f64.powi(shift as i32)
}

pub fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).to_string().parse().unwrap()
}

/// `exp(−iHt)` by a scaled Taylor series with repeated squaring.
pub fn taylor_propagator(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let generator = h * Complex64::new(0.0, -t);
    let norm = generator.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let scaled = &generator / Complex64::new(2f64.powi(squarings), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for j in 1..=40 {
        term = &term * &scaled / Complex64::new(j as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
