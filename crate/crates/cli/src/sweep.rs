use std::f64::consts::PI;

/// Upper bound on the number of values one sweep may expand to.
pub const MAX_SWEEP_LEN: usize = 100_000;

/// Values given as `start:stop:step` (stop included when hit), a comma list,
/// or a single value. The source text is kept for the output header.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep<T> {
    values: Vec<T>,
    text: String,
}

impl<T: Copy> Sweep<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// A real number, optionally as a multiple of `pi`: `pi`, `-pi/2`, `0.5pi`,
/// `3*pi/4`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let bad = || format!("not a number: '{s}'");
    let v = if let Some(idx) = t.find("pi") {
        let coef = t[..idx].trim_end_matches('*');
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let rest = &t[idx + 2..];
        let d = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI / d
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: '{s}'"))
    }
}

fn too_long(s: &str) -> String {
    format!("sweep '{s}' expands to more than {MAX_SWEEP_LEN} values")
}

fn split<T, F>(s: &str, parse: F, range: fn(&str, T, T, T) -> Result<Vec<T>, String>) -> Result<Sweep<T>, String>
where
    F: Fn(&str) -> Result<T, String>,
{
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [one] => one.split(',').map(&parse).collect::<Result<Vec<_>, _>>()?,
        [a, b, c] => range(s, parse(a)?, parse(b)?, parse(c)?)?,
        _ => return Err(format!("expected a value, a comma list or start:stop:step, got '{s}'")),
    };
    if values.len() > MAX_SWEEP_LEN {
        return Err(too_long(s));
    }
    Ok(Sweep {
        values,
        text: s.trim().to_string(),
    })
}

fn real_range(s: &str, start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if step == 0.0 {
        return Err(format!("zero step in '{s}'"));
    }
    let span = (stop - start) / step;
    if span < -1e-9 {
        return Err(format!("step in '{s}' points away from stop"));
    }
    // Relative slack so that 0:1:0.1 includes 1.
    let count = (span + 1e-9).floor() + 1.0;
    if count > MAX_SWEEP_LEN as f64 {
        return Err(too_long(s));
    }
    Ok((0..count as usize).map(|i| start + i as f64 * step).collect())
}

fn int_range(s: &str, start: i64, stop: i64, step: i64) -> Result<Vec<i64>, String> {
    if step == 0 {
        return Err(format!("zero step in '{s}'"));
    }
    if (stop - start).signum() * step.signum() < 0 {
        return Err(format!("step in '{s}' points away from stop"));
    }
    let count = (stop - start) / step + 1;
    if count as usize > MAX_SWEEP_LEN {
        return Err(too_long(s));
    }
    Ok((0..count).map(|i| start + i * step).collect())
}

pub fn parse_reals(s: &str) -> Result<Sweep<f64>, String> {
    split(s, parse_real, real_range)
}

/// Nonnegative integer sweep.
pub fn parse_counts(s: &str) -> Result<Sweep<u32>, String> {
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("not an integer: '{t}'"));
    let ints = split(s, parse, int_range)?;
    let values = ints
        .values
        .iter()
        .map(|&v| u32::try_from(v).map_err(|_| format!("'{v}' in '{s}' is not a nonnegative 32-bit integer")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sweep { values, text: ints.text })
}

/// Shortest string that parses back to the same `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}
