//! Surfaces with boundary encoded by a reference cyclic word.
//!
//! A surface is an alphabet of `g` letters closed under a fixed-point-free
//! inverse involution, together with a cyclic word listing every letter
//! exactly once. Gluing the alternately labelled edges of a `2g`-gon along
//! that word produces the surface. "Clockwise" always means increasing index
//! in the stored reference word.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or inverse generator, stored as a dense index in `[0, g)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How inverse letters are written in word literals.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Notation {
    /// `A` is the inverse of `a`.
    #[default]
    Upper,
    /// `a'` is the inverse of `a`.
    Prime,
}

impl FromStr for Notation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Notation::Upper),
            "prime" => Ok(Notation::Prime),
            other => Err(Error::InvalidArgument(format!(
                "unknown notation `{other}` (expected upper or prime)"
            ))),
        }
    }
}

/// Result of tracing the glued polygon complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GluingAnalysis {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub boundary_components: usize,
    pub orientable: bool,
    /// `None` when the surface is not orientable.
    pub genus: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surface {
    name: String,
    generators: Vec<String>,
    inverse: Vec<Letter>,
    reference: Vec<Letter>,
    position: Vec<usize>,
}

/// Names of the shipped presets.
pub const PRESETS: [&str; 3] = ["punctured_torus", "pair_of_pants", "genus2_one_boundary"];

impl Surface {
    /// Validates an alphabet of size `g`, an inverse pairing and a reference word.
    ///
    /// Letters in `pairing` and `reference` are raw indices in `[0, g)`.
    /// Generator names are assigned `a`, `b`, ... in order of the smaller
    /// element of each pair; the larger element is its inverse.
    pub fn build(g: usize, pairing: &[(usize, usize)], reference: &[usize]) -> Result<Surface> {
        if g < 4 || !g.is_multiple_of(2) || g > 52 {
            return Err(Error::InvalidAlphabetSize(g));
        }
        let mut inverse: Vec<Option<usize>> = vec![None; g];
        for &(x, y) in pairing {
            if x >= g || y >= g {
                return Err(Error::BadPairing(format!("({x}, {y}) out of range for g = {g}")));
            }
            if x == y {
                return Err(Error::BadPairing(format!("{x} paired with itself")));
            }
            for (a, b) in [(x, y), (y, x)] {
                match inverse[a] {
                    None => inverse[a] = Some(b),
                    Some(prev) if prev == b => {}
                    Some(prev) => {
                        return Err(Error::BadPairing(format!(
                            "{a} paired with both {prev} and {b}"
                        )))
                    }
                }
            }
        }
        let inverse: Vec<Letter> = inverse
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.map(|j| Letter(j as u8))
                    .ok_or_else(|| Error::BadPairing(format!("{i} has no inverse")))
            })
            .collect::<Result<_>>()?;

        let generators: Vec<String> = (0..g / 2).map(generator_name).collect();
        let reference: Vec<Letter> = reference.iter().map(|&i| Letter(i as u8)).collect();
        Self::assemble("custom".into(), generators, inverse, reference)
    }

    fn assemble(
        name: String,
        generators: Vec<String>,
        inverse: Vec<Letter>,
        reference: Vec<Letter>,
    ) -> Result<Surface> {
        let g = inverse.len();
        if reference.len() != g {
            return Err(Error::ReferenceLength { expected: g, found: reference.len() });
        }
        let mut position = vec![usize::MAX; g];
        for (i, &x) in reference.iter().enumerate() {
            if x.index() >= g {
                return Err(Error::UnknownLetter(format!("#{}", x.0)));
            }
            if position[x.index()] != usize::MAX {
                let s = Surface {
                    name: String::new(),
                    generators: generators.clone(),
                    inverse: inverse.clone(),
                    reference: Vec::new(),
                    position: Vec::new(),
                };
                return Err(Error::DuplicateLetter(s.letter_name(x, Notation::Upper)));
            }
            position[x.index()] = i;
        }
        Ok(Surface { name, generators, inverse, reference, position })
    }

    /// Builds a surface from generator names and a reference word literal.
    ///
    /// Generator `k` gets letter ids `2k` (itself) and `2k + 1` (inverse).
    pub fn from_names(generators: &[&str], reference: &str, notation: Notation) -> Result<Surface> {
        let g = generators.len() * 2;
        if g < 4 {
            return Err(Error::InvalidAlphabetSize(g));
        }
        for (i, n) in generators.iter().enumerate() {
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(Error::MalformedSurface(format!(
                    "generator name `{n}` must be lowercase ASCII"
                )));
            }
            if generators[..i].contains(n) {
                return Err(Error::MalformedSurface(format!("generator `{n}` listed twice")));
            }
        }
        let inverse: Vec<Letter> = (0..g).map(|i| Letter((i ^ 1) as u8)).collect();
        let skeleton = Surface {
            name: String::new(),
            generators: generators.iter().map(|s| s.to_string()).collect(),
            inverse: inverse.clone(),
            reference: Vec::new(),
            position: Vec::new(),
        };
        let letters = skeleton.parse_letters(reference, notation)?;
        Self::assemble("custom".into(), skeleton.generators, inverse, letters)
    }

    /// One of the shipped presets; each is checked to be orientable with boundary.
    pub fn preset(name: &str) -> Result<Surface> {
        let (gens, word): (&[&str], &str) = match name {
            "punctured_torus" => (&["a", "b"], "a b A B"),
            "pair_of_pants" => (&["a", "b"], "a A b B"),
            "genus2_one_boundary" => (&["a", "b", "c", "d"], "a b A B c d C D"),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown preset `{other}` (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let mut s = Surface::from_names(gens, word, Notation::Upper)?;
        s.name = name.to_string();
        let info = s.analyze_gluing();
        assert!(info.orientable && info.boundary_components >= 1, "preset {name} is malformed");
        Ok(s)
    }

    /// Parses the two-line surface description format.
    pub fn parse_description(text: &str, notation: Notation) -> Result<Surface> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let gens = lines
            .next()
            .ok_or_else(|| Error::MalformedSurface("missing generator line".into()))?;
        let word = lines
            .next()
            .ok_or_else(|| Error::MalformedSurface("missing reference word line".into()))?;
        if let Some(extra) = lines.next() {
            return Err(Error::MalformedSurface(format!("unexpected third line `{extra}`")));
        }
        let gens: Vec<&str> = gens.split_whitespace().collect();
        Surface::from_names(&gens, word, notation)
    }

    /// Serializes to the two-line description format.
    pub fn to_description(&self, notation: Notation) -> String {
        format!(
            "{}\n{}\n",
            self.generators.join(" "),
            self.format_word(&self.reference, notation)
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Alphabet size `g`.
    #[inline]
    pub fn g(&self) -> usize {
        self.inverse.len()
    }

    /// `χ = 1 − g/2`.
    pub fn euler_characteristic(&self) -> i64 {
        1 - (self.g() / 2) as i64
    }

    #[inline]
    pub fn inv(&self, x: Letter) -> Letter {
        self.inverse[x.index()]
    }

    #[inline]
    pub fn pos(&self, x: Letter) -> usize {
        self.position[x.index()]
    }

    pub fn reference(&self) -> &[Letter] {
        &self.reference
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.g()).map(|i| Letter(i as u8))
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    /// Printable name of a letter.
    pub fn letter_name(&self, x: Letter, notation: Notation) -> String {
        let i = x.index();
        // generator k owns the smaller id of its pair
        let rep = i.min(self.inverse[i].index());
        let k = (0..self.inverse.len())
            .filter(|&j| j < self.inverse[j].index())
            .position(|j| j == rep)
            .unwrap_or(0);
        let base = self
            .generators
            .get(k)
            .cloned()
            .unwrap_or_else(|| format!("x{k}"));
        if i == rep {
            base
        } else {
            match notation {
                Notation::Upper => base.to_uppercase(),
                Notation::Prime => format!("{base}'"),
            }
        }
    }

    pub fn format_word(&self, w: &[Letter], notation: Notation) -> String {
        w.iter()
            .map(|&x| self.letter_name(x, notation))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a word literal. Tokens are whitespace separated; when every
    /// generator name is a single character, a compact form such as `abCa`
    /// is also accepted.
    pub fn parse_letters(&self, text: &str, notation: Notation) -> Result<Vec<Letter>> {
        let single_char = self.generators.iter().all(|n| n.len() == 1);
        let tokens: Vec<String> = if text.split_whitespace().count() == 1 && single_char {
            let t = text.trim();
            let mut out = Vec::new();
            let mut chars = t.chars().peekable();
            while let Some(c) = chars.next() {
                let mut tok = c.to_string();
                if notation == Notation::Prime && chars.peek() == Some(&'\'') {
                    chars.next();
                    tok.push('\'');
                }
                out.push(tok);
            }
            out
        } else {
            text.split_whitespace().map(str::to_string).collect()
        };
        tokens.iter().map(|t| self.parse_token(t, notation)).collect()
    }

    fn parse_token(&self, tok: &str, notation: Notation) -> Result<Letter> {
        let (base, inverted) = match notation {
            Notation::Upper => {
                if tok.chars().all(|c| c.is_ascii_uppercase()) {
                    (tok.to_ascii_lowercase(), true)
                } else {
                    (tok.to_string(), false)
                }
            }
            Notation::Prime => match tok.strip_suffix('\'') {
                Some(b) => (b.to_string(), true),
                None => (tok.to_string(), false),
            },
        };
        let k = self
            .generators
            .iter()
            .position(|n| *n == base)
            .ok_or_else(|| Error::UnknownLetter(tok.to_string()))?;
        let rep = (0..self.inverse.len())
            .filter(|&j| j < self.inverse[j].index())
            .nth(k)
            .ok_or_else(|| Error::UnknownLetter(tok.to_string()))?;
        let x = Letter(rep as u8);
        Ok(if inverted { self.inv(x) } else { x })
    }

    /// Cyclic order of three or four letters in the reference word:
    /// `+1` clockwise, `−1` counterclockwise, `0` otherwise (including any
    /// repeated letter).
    pub fn cyclic_order(&self, letters: &[Letter]) -> i8 {
        debug_assert!(letters.len() == 3 || letters.len() == 4);
        let m = letters.len();
        let mut p = [0usize; 4];
        for (slot, &x) in p.iter_mut().zip(letters) {
            *slot = self.pos(x);
        }
        for i in 0..m {
            for j in i + 1..m {
                if p[i] == p[j] {
                    return 0;
                }
            }
        }
        let descents = (0..m).filter(|&i| p[(i + 1) % m] < p[i]).count();
        if descents == 1 {
            1
        } else if descents == m - 1 {
            -1
        } else {
            0
        }
    }

    /// [`Surface::cyclic_order`] with argument validation.
    pub fn cyclic_order_checked(&self, letters: &[Letter]) -> Result<i8> {
        if letters.len() != 3 && letters.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "cyclic order takes 3 or 4 letters, got {}",
                letters.len()
            )));
        }
        if let Some(x) = letters.iter().find(|x| x.index() >= self.g()) {
            return Err(Error::UnknownLetter(format!("#{}", x.0)));
        }
        Ok(self.cyclic_order(letters))
    }

    /// Number of letters strictly between `x̄` and `y`, clockwise.
    #[inline]
    pub fn gap_unchecked(&self, x: Letter, y: Letter) -> usize {
        let g = self.g();
        (self.pos(y) + 2 * g - self.pos(self.inv(x)) - 1) % g
    }

    pub fn gap(&self, x: Letter, y: Letter) -> Result<usize> {
        if x.index() >= self.g() || y.index() >= self.g() {
            return Err(Error::UnknownLetter(format!("#{}/#{}", x.0, y.0)));
        }
        if y == self.inv(x) {
            return Err(Error::NotReduced(0, 1));
        }
        Ok(self.gap_unchecked(x, y))
    }

    /// Number of letters strictly between `y` and `x̄`, clockwise.
    pub fn gap_counterclockwise(&self, x: Letter, y: Letter) -> usize {
        let g = self.g();
        (self.pos(self.inv(x)) + 2 * g - self.pos(y) - 1) % g
    }

    /// Builds the `2g`-gon with alternately labelled edges, glues each
    /// labelled edge to the edge carrying the inverse letter, and counts
    /// vertex classes and boundary cycles.
    pub fn analyze_gluing(&self) -> GluingAnalysis {
        let g = self.g();
        // Polygon vertices 0..2g. Slot t holds reference[t] on edge (2t, 2t+1),
        // read clockwise; edge (2t+1, 2t+2) is unlabelled.
        let mut uf = UnionFind::new(2 * g);
        let mut orientable = true;
        for t in 0..g {
            let x = self.reference[t];
            let x_bar = self.inv(x);
            if x.index() > x_bar.index() {
                continue;
            }
            let s = self.pos(x_bar);
            // Underlying edge runs tail -> head along slot t, and head -> tail
            // along slot s, since slot s reads it backwards.
            let (tail_t, head_t) = (2 * t, 2 * t + 1);
            let (tail_s, head_s) = (2 * s + 1, 2 * s);
            uf.union(tail_t, tail_s);
            uf.union(head_t, head_s);
            // A pair glued with opposite traversal directions keeps the
            // orientation of the disk; equal directions would make a band twist.
            let direction = |l: Letter| if l.index() < self.inv(l).index() { 1i8 } else { -1 };
            orientable &= direction(x) != direction(x_bar);
        }
        let mut class_of = vec![usize::MAX; 2 * g];
        let mut classes = 0;
        for v in 0..2 * g {
            let r = uf.find(v);
            if class_of[r] == usize::MAX {
                class_of[r] = classes;
                classes += 1;
            }
        }
        let mut boundary = UnionFind::new(classes);
        for t in 0..g {
            let a = class_of[uf.find(2 * t + 1)];
            let b = class_of[uf.find((2 * t + 2) % (2 * g))];
            boundary.union(a, b);
        }
        let boundary_components = (0..classes).filter(|&c| boundary.find(c) == c).count();
        let vertices = classes;
        let edges = g / 2 + g;
        let faces = 1;
        let euler = vertices as i64 - edges as i64 + faces as i64;
        let genus = orientable.then(|| (2 - euler - boundary_components as i64) / 2);
        GluingAnalysis {
            vertices,
            edges,
            faces,
            euler_characteristic: euler,
            boundary_components,
            orientable,
            genus,
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (g = {}, O = {})",
            self.name,
            self.g(),
            self.format_word(&self.reference, Notation::Upper)
        )
    }
}

fn generator_name(k: usize) -> String {
    if k < 26 {
        ((b'a' + k as u8) as char).to_string()
    } else {
        format!("x{k}")
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
