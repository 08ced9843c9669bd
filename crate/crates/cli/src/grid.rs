use std::str::FromStr;

/// `a:b:n`: `n` points from `a` to `b`, equally spaced in `log`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected a:b:n, got {s:?}"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (a, b) = (num(a)?, num(b)?);
        let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
        if !(a > 0.0 && b.is_finite() && b >= a) {
            return Err(format!("grid needs 0 < a ≤ b, got {a}:{b}"));
        }
        if n == 0 || (n == 1 && a != b) {
            return Err("a grid from a to b needs at least two points".into());
        }
        let points = if n == 1 {
            vec![a]
        } else {
            let r = (b / a).ln() / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { b } else { a * (r * i as f64).exp() }).collect()
        };
        Ok(Grid { points })
    }
}
