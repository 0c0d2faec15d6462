use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

/// Coefficient carried by a polynomial term: a finite power series in ħ with
/// complex coefficients, `Σ_h c_h ħ^h`. Keeping ħ symbolic lets printed
/// output show `hbar` and makes equality exact per power.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HbarSeries(BTreeMap<u32, C64>);

impl HbarSeries {
    pub fn constant(c: C64) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: C64, hbar_power: u32) -> Self {
        let mut s = Self::default();
        s.add_term(hbar_power, c);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `(hbar_power, coefficient)` pairs in ascending power.
    pub fn iter(&self) -> impl Iterator<Item = (u32, C64)> + '_ {
        self.0.iter().map(|(&h, &c)| (h, c))
    }

    pub fn coefficient(&self, hbar_power: u32) -> C64 {
        self.0.get(&hbar_power).copied().unwrap_or_default()
    }

    pub fn evaluate(&self, hbar: f64) -> C64 {
        self.0.iter().map(|(&h, &c)| c * hbar.powi(h as i32)).sum()
    }

    pub(crate) fn add_term(&mut self, hbar_power: u32, c: C64) {
        let entry = self.0.entry(hbar_power).or_default();
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.0.remove(&hbar_power);
        }
    }

    /// Adds `factor · ħ^shift · other` in place.
    pub(crate) fn add_scaled(&mut self, other: &HbarSeries, factor: C64, shift: u32) {
        for (h, c) in other.iter() {
            self.add_term(h + shift, c * factor);
        }
    }

    pub(crate) fn product(&self, other: &HbarSeries) -> HbarSeries {
        let mut out = HbarSeries::default();
        for (h1, c1) in self.iter() {
            for (h2, c2) in other.iter() {
                out.add_term(h1 + h2, c1 * c2);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &HbarSeries) -> f64 {
        let mut keys: Vec<u32> = self.0.keys().chain(other.0.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|h| (self.coefficient(h) - other.coefficient(h)).norm())
            .fold(0.0, f64::max)
    }
}

/// Shared storage for both algebras: `(qpow, ppow) -> coefficient`, with
/// zero coefficients pruned.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Terms(BTreeMap<(u32, u32), HbarSeries>);

impl Terms {
    pub(crate) fn add_series(&mut self, key: (u32, u32), series: &HbarSeries, factor: C64, shift: u32) {
        let entry = self.0.entry(key).or_default();
        entry.add_scaled(series, factor, shift);
        if entry.is_zero() {
            self.0.remove(&key);
        }
    }

    pub(crate) fn add_term(&mut self, key: (u32, u32), hbar_power: u32, c: C64) {
        self.add_series(key, &HbarSeries::monomial(c, hbar_power), C64::new(1.0, 0.0), 0);
    }

    pub(crate) fn add_all(&mut self, other: &Terms, factor: C64) {
        for (&key, series) in &other.0 {
            self.add_series(key, series, factor, 0);
        }
    }

    pub(crate) fn scaled(&self, factor: C64, shift: u32) -> Terms {
        let mut out = Terms::default();
        for (&key, series) in &self.0 {
            out.add_series(key, series, factor, shift);
        }
        out
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = ((u32, u32), &HbarSeries)> + '_ {
        self.0.iter().map(|(&k, s)| (k, s))
    }

    pub(crate) fn get(&self, key: (u32, u32)) -> Option<&HbarSeries> {
        self.0.get(&key)
    }

    pub(crate) fn len(&self) -> usize {
        self.0.len()
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn degree(&self) -> u32 {
        self.0.keys().map(|&(q, p)| q + p).max().unwrap_or(0)
    }

    pub(crate) fn max_abs_diff(&self, other: &Terms) -> f64 {
        let empty = HbarSeries::default();
        let mut keys: Vec<(u32, u32)> = self.0.keys().chain(other.0.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|k| {
                let a = self.0.get(&k).unwrap_or(&empty);
                let b = other.0.get(&k).unwrap_or(&empty);
                a.max_abs_diff(b)
            })
            .fold(0.0, f64::max)
    }

    /// Flattened `(qpow, ppow, hbar_power, coeff)` in print order: descending
    /// total degree, then descending qpow, then ascending ħ power.
    pub(crate) fn print_order(&self) -> Vec<(u32, u32, u32, C64)> {
        let mut flat: Vec<_> = self
            .0
            .iter()
            .flat_map(|(&(q, p), s)| s.iter().map(move |(h, c)| (q, p, h, c)))
            .collect();
        flat.sort_by(|a, b| {
            (b.0 + b.1)
                .cmp(&(a.0 + a.1))
                .then(b.0.cmp(&a.0))
                .then(a.2.cmp(&b.2))
        });
        flat
    }
}

fn format_number(x: f64) -> String {
    format!("{x}")
}

/// Splits a coefficient into a sign and an optional printed body; `None`
/// means unit magnitude.
fn coefficient_parts(c: C64) -> (bool, Option<String>) {
    if c.im == 0.0 {
        let mag = c.re.abs();
        (c.re < 0.0, (mag != 1.0).then(|| format_number(mag)))
    } else if c.re == 0.0 {
        let mag = c.im.abs();
        let body = if mag == 1.0 { "i".to_string() } else { format!("{} i", format_number(mag)) };
        (c.im < 0.0, Some(body))
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        (false, Some(format!("({}{}{}i)", format_number(c.re), sign, format_number(c.im.abs()))))
    }
}

fn power_factor(name: &str, power: u32) -> Option<String> {
    match power {
        0 => None,
        1 => Some(name.to_string()),
        k => Some(format!("{name}^{k}")),
    }
}

/// Renders terms as `c hbar^h x^a y^b` summands. `q_first` selects the
/// variable order inside a monomial.
pub(crate) fn render(terms: &Terms, q_first: bool) -> String {
    let flat = terms.print_order();
    if flat.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (q, p, h, c)) in flat.into_iter().enumerate() {
        let (negative, body) = coefficient_parts(c);
        let mut factors: Vec<String> = body.into_iter().collect();
        factors.extend(power_factor("hbar", h));
        let (first, second) = if q_first { (("q", q), ("p", p)) } else { (("p", p), ("q", q)) };
        factors.extend(power_factor(first.0, first.1));
        factors.extend(power_factor(second.0, second.1));
        if factors.is_empty() {
            factors.push("1".to_string());
        }
        match (idx, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&factors.join(" "));
    }
    out
}

/// Binomial coefficient in exact integer arithmetic.
pub(crate) fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `n! / (n - r)!`, zero for `r > n`.
pub(crate) fn falling_factorial(n: u32, r: u32) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).map(|i| (n - i) as u128).product()
}
