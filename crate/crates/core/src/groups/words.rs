use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::FiniteGroup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    /// +1 or −1.
    pub exp: i8,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, exp: -self.exp }
    }
}

/// A word in a free group over an indexed alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn gen(gen: usize) -> Self {
        Word { letters: vec![Letter { gen, exp: 1 }] }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Freely reduced concatenation.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last().is_some_and(|&last| last == l.inverse()) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Word { letters }
    }

    /// [a, b] = a b a⁻¹ b⁻¹.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Image under generator ↦ `images[gen]` in a finite group.
    pub fn eval(&self, group: &FiniteGroup, images: &[usize]) -> usize {
        self.letters.iter().fold(group.identity(), |acc, l| {
            let x = images[l.gen];
            group.mul(acc, if l.exp > 0 { x } else { group.inv(x) })
        })
    }

    /// Parses `x^3 y^-1 [x,y] (x y)^2` over `alphabet`.
    pub fn parse(s: &str, alphabet: &[String]) -> Result<Word> {
        let chars: Vec<char> = s.chars().collect();
        let mut pos = 0;
        let w = parse_word(&chars, &mut pos, alphabet)?;
        skip_ws(&chars, &mut pos);
        if pos != chars.len() {
            return Err(Error::Schema { field: "relator".into(), message: format!("unexpected '{}' in {s:?}", chars[pos]) });
        }
        Ok(w)
    }

    pub fn display(&self, alphabet: &[String]) -> String {
        if self.letters.is_empty() {
            return "1".into();
        }
        self.letters
            .iter()
            .map(|l| if l.exp > 0 { alphabet[l.gen].clone() } else { format!("{}^-1", alphabet[l.gen]) })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn skip_ws(c: &[char], pos: &mut usize) {
    while *pos < c.len() && (c[*pos].is_whitespace() || c[*pos] == '*' || c[*pos] == '.') {
        *pos += 1;
    }
}

fn parse_err(msg: String) -> Error {
    Error::Schema { field: "relator".into(), message: msg }
}

fn parse_word(c: &[char], pos: &mut usize, alphabet: &[String]) -> Result<Word> {
    let mut w = Word::empty();
    loop {
        skip_ws(c, pos);
        if *pos >= c.len() || matches!(c[*pos], ',' | ']' | ')') {
            return Ok(w);
        }
        let atom = match c[*pos] {
            '[' => {
                *pos += 1;
                let a = parse_word(c, pos, alphabet)?;
                if c.get(*pos) != Some(&',') {
                    return Err(parse_err("expected ',' in commutator".into()));
                }
                *pos += 1;
                let b = parse_word(c, pos, alphabet)?;
                if c.get(*pos) != Some(&']') {
                    return Err(parse_err("expected ']'".into()));
                }
                *pos += 1;
                Word::commutator(&a, &b)
            }
            '(' => {
                *pos += 1;
                let a = parse_word(c, pos, alphabet)?;
                if c.get(*pos) != Some(&')') {
                    return Err(parse_err("expected ')'".into()));
                }
                *pos += 1;
                a
            }
            ch if ch.is_alphabetic() => {
                let start = *pos;
                while *pos < c.len() && (c[*pos].is_alphanumeric() || c[*pos] == '_') {
                    *pos += 1;
                }
                let name: String = c[start..*pos].iter().collect();
                let Some(g) = alphabet.iter().position(|a| *a == name) else {
                    return Err(Error::UndeclaredGenerator(name));
                };
                Word::gen(g)
            }
            ch => return Err(parse_err(format!("unexpected '{ch}'"))),
        };
        let mut exp = 1i64;
        if c.get(*pos) == Some(&'^') {
            *pos += 1;
            let start = *pos;
            if c.get(*pos) == Some(&'-') {
                *pos += 1;
            }
            while *pos < c.len() && c[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let txt: String = c[start..*pos].iter().collect();
            exp = txt.parse().map_err(|_| parse_err(format!("bad exponent {txt:?}")))?;
        }
        w = w.concat(&atom.pow(exp));
    }
}

/// A finite presentation of a finite group, with generator images.
#[derive(Clone, Debug)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
    target: Arc<FiniteGroup>,
    images: Vec<usize>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>, target: Arc<FiniteGroup>, images: Vec<usize>) -> Result<Self> {
        if images.len() != generators.len() {
            return Err(Error::ShapeMismatch(format!("{} generators but {} images", generators.len(), images.len())));
        }
        if images.iter().any(|&x| x >= target.order()) {
            return Err(Error::InvalidGroup("generator image out of range".into()));
        }
        for (i, r) in relators.iter().enumerate() {
            if r.letters.iter().any(|l| l.gen >= generators.len()) {
                return Err(Error::UndeclaredGenerator(format!("relator {i}")));
            }
            if r.eval(&target, &images) != target.identity() {
                return Err(Error::Hypothesis(format!(
                    "relator {} is not trivial in {}",
                    r.display(&generators),
                    target.name()
                )));
            }
        }
        if target.closure(&images).len() != target.order() {
            return Err(Error::Hypothesis(format!("generator images do not generate {}", target.name())));
        }
        Ok(Presentation { generators, relators, target, images })
    }

    /// Builds from relator strings, mapping generators to the target's distinguished generators in order.
    pub fn parse(target: Arc<FiniteGroup>, generators: &[&str], relators: &[&str]) -> Result<Self> {
        let gens: Vec<String> = generators.iter().map(|s| s.to_string()).collect();
        let rels = relators.iter().map(|r| Word::parse(r, &gens)).collect::<Result<Vec<_>>>()?;
        if target.generators().len() != gens.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} has {} distinguished generators, presentation has {}",
                target.name(),
                target.generators().len(),
                gens.len()
            )));
        }
        let images = target.generators().to_vec();
        Presentation::new(gens, rels, target, images)
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }
    pub fn rank(&self) -> usize {
        self.generators.len()
    }
    pub fn relators(&self) -> &[Word] {
        &self.relators
    }
    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }
    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.relators.iter().map(|r| r.display(&self.generators)).collect();
        write!(f, "<{} | {}>", self.generators.join(", "), rels.join(", "))
    }
}

/// Built-in presentation on the group's distinguished generators.
pub fn natural_presentation(group: Arc<FiniteGroup>) -> Result<Presentation> {
    let name = group.name().to_string();
    if group.order() == 1 {
        return Presentation::new(vec![], vec![], group, vec![]);
    }
    if let Some(n) = name.strip_prefix("Dic").and_then(|s| s.parse::<usize>().ok()) {
        let n = n / 4;
        return Presentation::parse(group, &["a", "x"], &[&format!("a^{}", 2 * n), &format!("x^2 a^-{n}"), "x^-1 a x a"]);
    }
    match name.as_str() {
        "S3" => return Presentation::parse(group, &["x", "y"], &["x^2", "y^3", "(x y)^2"]),
        "A4" => return Presentation::parse(group, &["x", "y"], &["x^2", "y^3", "(x y)^3"]),
        "Q8" => return Presentation::parse(group, &["a", "x"], &["a^4", "x^2 a^-2", "x^-1 a x a"]),
        _ => {}
    }
    if let Some(m) = name.strip_prefix('D').and_then(|s| s.parse::<usize>().ok()) {
        return Presentation::parse(group, &["x", "y"], &["x^2", &format!("y^{}", m / 2), "(x y)^2"]);
    }
    if group.is_abelian() {
        let k = group.generators().len();
        let gens: Vec<String> = if k == 1 { vec!["x".into()] } else { (1..=k).map(|i| format!("x{i}")).collect() };
        let mut rels: Vec<String> = group
            .generators()
            .iter()
            .zip(&gens)
            .map(|(&g, s)| format!("{s}^{}", group.element_order(g)))
            .collect();
        for i in 0..k {
            for j in i + 1..k {
                rels.push(format!("[{},{}]", gens[i], gens[j]));
            }
        }
        let gs: Vec<&str> = gens.iter().map(String::as_str).collect();
        let rs: Vec<&str> = rels.iter().map(String::as_str).collect();
        return Presentation::parse(group, &gs, &rs);
    }
    Err(Error::Unsupported(format!("no built-in presentation for {name}; supply one with --presentation-file")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parse_and_reduce() {
        let a = alpha(&["x", "c"]);
        let w = Word::parse("[x,c]", &a).unwrap();
        assert_eq!(w.display(&a), "x c x^-1 c^-1");
        assert_eq!(Word::parse("x x^-1", &a).unwrap(), Word::empty());
        assert_eq!(Word::parse("(x c)^2", &a).unwrap().len(), 4);
        assert!(matches!(Word::parse("y", &a), Err(Error::UndeclaredGenerator(_))));
    }

    #[test]
    fn natural_presentations_hold() {
        let groups = [
            FiniteGroup::cyclic(5).unwrap(),
            FiniteGroup::abelian(&[2, 2]).unwrap(),
            FiniteGroup::symmetric3().unwrap(),
            FiniteGroup::dihedral(4).unwrap(),
            FiniteGroup::quaternion8().unwrap(),
            FiniteGroup::alternating4().unwrap(),
            FiniteGroup::dicyclic(3).unwrap(),
        ];
        for g in groups {
            let p = natural_presentation(Arc::new(g)).unwrap();
            assert!(p.rank() >= 1);
        }
    }

    #[test]
    fn bad_relator_rejected() {
        let g = Arc::new(FiniteGroup::cyclic(4).unwrap());
        assert!(Presentation::parse(g, &["x"], &["x^2"]).is_err());
    }
}
