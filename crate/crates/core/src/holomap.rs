//! Germs of holomorphic maps `(ℂ^{n+1}, 0) → (ℂ^{n+1}, 0)`.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};
use crate::series::{Jet, Series, Vars};
use crate::textfmt::{DocWriter, Document};

/// Variables `z1 … zn w` of the source of a map.
pub fn map_vars(n: usize) -> Vars {
    let mut names: Vec<String> = (1..=n).map(|j| format!("z{j}")).collect();
    names.push("w".into());
    Vars::new(&names)
}

/// `H = (F_1, …, F_n, G)` as series in `z1 … zn w`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloMap<C: Scalar> {
    pub f: Vec<Series<C>>,
    pub g: Series<C>,
}

impl<C: Scalar> HoloMap<C> {
    pub fn new(f: Vec<Series<C>>, g: Series<C>) -> Result<Self> {
        let vars = map_vars(f.len());
        let fix = |s: Series<C>| -> Result<Series<C>> {
            if *s.vars() == vars {
                Ok(s)
            } else {
                s.embed_by_name(&vars)
            }
        };
        let f = f.into_iter().map(fix).collect::<Result<Vec<_>>>()?;
        let g = fix(g)?;
        Ok(HoloMap { f, g })
    }

    pub fn identity(n: usize, trunc: u32) -> Self {
        let v = map_vars(n);
        HoloMap {
            f: (0..n).map(|j| Series::var(&v, j, trunc)).collect(),
            g: Series::var(&v, n, trunc),
        }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn vars(&self) -> Vars {
        map_vars(self.n())
    }

    pub fn trunc(&self) -> u32 {
        self.f.iter().map(Series::trunc).fold(self.g.trunc(), u32::min)
    }

    pub fn with_tol(self, tol: Tolerance) -> Self {
        HoloMap {
            f: self.f.into_iter().map(|s| s.with_tol(tol)).collect(),
            g: self.g.with_tol(tol),
        }
    }

    /// Components in order `F_1, …, F_n, G`.
    pub fn components(&self) -> Vec<Series<C>> {
        let mut out = self.f.clone();
        out.push(self.g.clone());
        out
    }

    pub fn from_components(mut comps: Vec<Series<C>>) -> Result<Self> {
        let g = comps.pop().ok_or_else(|| Error::Invalid("empty map".into()))?;
        Self::new(comps, g)
    }

    pub fn with_trunc(&self, trunc: u32) -> Self {
        HoloMap {
            f: self.f.iter().map(|s| s.with_trunc(trunc)).collect(),
            g: self.g.with_trunc(trunc),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &HoloMap<C>) -> Result<Self> {
        let imgs = inner.components();
        Self::from_components(
            self.components()
                .iter()
                .map(|c| c.compose(&imgs))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Substitutes the components into a series in `z1 … zn w`-shaped
    /// variables (`n + 1` of them, any names).
    pub fn pull_back(&self, s: &Series<C>) -> Result<Series<C>> {
        s.compose(&self.components())
    }

    pub fn jet(&self, k: u32) -> Result<Vec<Jet<C>>> {
        self.components().iter().map(|c| c.jet(k)).collect()
    }

    /// Whether `j^k H = j^k Id`.
    pub fn tangent_to_identity(&self, k: u32) -> Result<bool> {
        let id = HoloMap::identity(self.n(), self.trunc());
        let tol = self.g.tol();
        Ok(self
            .jet(k)?
            .iter()
            .zip(id.jet(k)?)
            .all(|(a, b)| a.approx_eq(&b, tol)))
    }

    /// Lowest degree at which `H` differs from the identity, if any.
    pub fn identity_defect(&self) -> Option<u32> {
        let id = HoloMap::identity(self.n(), self.trunc());
        let tol = self.g.tol();
        self.components()
            .iter()
            .zip(id.components())
            .filter_map(|(a, b)| (a - &b).first_defect(tol).map(|(m, _)| m.degree()))
            .min()
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D + Copy, tol: Tolerance) -> HoloMap<D> {
        HoloMap {
            f: self.f.iter().map(|s| s.map_coeffs(f, tol)).collect(),
            g: self.g.map_coeffs(f, tol),
        }
    }

    pub fn write(&self, w: &mut DocWriter) {
        for (j, fj) in self.f.iter().enumerate() {
            w.series(&format!("F{}", j + 1), fj);
        }
        w.series("G", &self.g);
    }

    pub fn read(doc: &Document, n: usize) -> Result<Self> {
        let f = (1..=n)
            .map(|j| doc.require_series(&format!("F{j}")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(f, doc.require_series("G")?)
    }

    /// Reads a map file, inferring `n` from the `F` blocks present.
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let n = doc
            .labels()
            .filter(|l| l.starts_with('F') && l[1..].parse::<usize>().is_ok())
            .count();
        Self::read(&doc, n)
    }

    pub fn to_text(&self) -> String {
        let mut w = DocWriter::new();
        w.header("n", self.n());
        self.write(&mut w);
        w.finish()
    }
}
