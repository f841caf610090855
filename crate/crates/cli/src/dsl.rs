//! Surface expressions.
//!
//! ```text
//! gamma   := chain | vector | expr
//! vector  := '[' expr (',' expr)* ']'
//! chain   := factor (('∘' | 'o') factor)*
//! factor  := 'exp' '[' term (',' term)* ']'
//! term    := '(' int (',' int)* ')' '->' expr
//! expr    := ['+' | '-'] prod (('+' | '-') prod)*
//! prod    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' int)?
//! atom    := number | ident | '(' expr ')'
//! ```
//!
//! Identifiers: t1..tN (s1..sN are aliases), x1..xn, and d1..dn for the
//! coordinate fields inside `exp[...]`. Numbers are integers or decimals; `/`
//! only divides by a nonzero constant.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use radon_algebra::{parse_q, DilationSpec, JetSeries, MultiIndex, Poly, TruncationPolicy, Q};
use radon_lie::{exp_map, VectorField};
use radon_surface::{extract_exp_fields, FieldMap, Surface, SurfaceForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DslErrorKind {
    Syntax,
    UnknownIdentifier,
    ArityOverflow,
    NonPolynomial,
    Surface,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DslError {
    pub kind: DslErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for DslError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

fn err<T>(kind: DslErrorKind, at: Pos, message: impl Into<String>) -> Result<T, DslError> {
    Err(DslError { kind, line: at.line, col: at.col, message: message.into() })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
    Arrow,
    Compose,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(s) | Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Op(c) => write!(f, "'{c}'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Compose => f.write_str("'∘'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn bump(c: char, pos: &mut Pos) {
    if c == '\n' {
        pos.line += 1;
        pos.col = 1;
    } else {
        pos.col += 1;
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut out = Vec::new();
    let mut it = text.chars().peekable();
    let mut pos = Pos { line: 1, col: 1 };
    while let Some(&c) = it.peek() {
        let start = pos;
        if c.is_whitespace() {
            it.next();
            bump(c, &mut pos);
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            while let Some(&d) = it.peek() {
                if d.is_ascii_digit() || d == '.' {
                    s.push(d);
                    it.next();
                    bump(d, &mut pos);
                } else {
                    break;
                }
            }
            out.push((Tok::Num(s), start));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut s = String::new();
            while let Some(&d) = it.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    it.next();
                    bump(d, &mut pos);
                } else {
                    break;
                }
            }
            out.push((if s == "o" { Tok::Compose } else { Tok::Ident(s) }, start));
            continue;
        }
        it.next();
        bump(c, &mut pos);
        let tok = match c {
            '-' if it.peek() == Some(&'>') => {
                it.next();
                bump('>', &mut pos);
                Tok::Arrow
            }
            '∘' => Tok::Compose,
            '−' => Tok::Op('-'),
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | '[' | ']' | ',' => Tok::Op(c),
            _ => return err(DslErrorKind::Syntax, start, format!("unexpected character '{c}'")),
        };
        out.push((tok, start));
    }
    out.push((Tok::End, pos));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    T(usize),
    X(usize),
    D(usize),
}

#[derive(Clone, Debug)]
enum Expr {
    Num(Q),
    Var(Var, Pos),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, Pos),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
}

#[derive(Clone, Debug)]
enum Ast {
    Vector(Vec<Expr>),
    Chain(Vec<Vec<(Vec<u32>, Pos, Expr)>>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    k: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.k].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.k].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.k].clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<Pos, DslError> {
        let (t, p) = self.next();
        if t == Tok::Op(c) {
            Ok(p)
        } else {
            err(DslErrorKind::Syntax, p, format!("expected '{c}', found {t}"))
        }
    }

    fn gamma(&mut self) -> Result<Ast, DslError> {
        let ast = match self.peek() {
            Tok::Ident(s) if s == "exp" => Ast::Chain(self.chain()?),
            Tok::Op('[') => {
                self.next();
                let mut v = vec![self.expr()?];
                while *self.peek() == Tok::Op(',') {
                    self.next();
                    v.push(self.expr()?);
                }
                self.expect(']')?;
                Ast::Vector(v)
            }
            _ => Ast::Vector(vec![self.expr()?]),
        };
        let (t, p) = self.next();
        if t != Tok::End {
            return err(DslErrorKind::Syntax, p, format!("unexpected {t} after a complete expression"));
        }
        Ok(ast)
    }

    fn chain(&mut self) -> Result<Vec<Vec<(Vec<u32>, Pos, Expr)>>, DslError> {
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Compose {
            self.next();
            factors.push(self.factor()?);
        }
        Ok(factors)
    }

    fn factor(&mut self) -> Result<Vec<(Vec<u32>, Pos, Expr)>, DslError> {
        match self.next() {
            (Tok::Ident(s), _) if s == "exp" => {}
            (t, p) => return err(DslErrorKind::Syntax, p, format!("expected 'exp', found {t}")),
        }
        self.expect('[')?;
        let mut terms = vec![self.term()?];
        while *self.peek() == Tok::Op(',') {
            self.next();
            terms.push(self.term()?);
        }
        self.expect(']')?;
        Ok(terms)
    }

    fn term(&mut self) -> Result<(Vec<u32>, Pos, Expr), DslError> {
        let at = self.expect('(')?;
        let mut alpha = vec![self.int()?];
        while *self.peek() == Tok::Op(',') {
            self.next();
            alpha.push(self.int()?);
        }
        self.expect(')')?;
        match self.next() {
            (Tok::Arrow, _) => {}
            (t, p) => return err(DslErrorKind::Syntax, p, format!("expected '->', found {t}")),
        }
        Ok((alpha, at, self.expr()?))
    }

    fn int(&mut self) -> Result<u32, DslError> {
        match self.next() {
            (Tok::Num(s), p) => s.parse().or_else(|_| err(DslErrorKind::Syntax, p, format!("'{s}' is not a nonnegative integer"))),
            (t, p) => err(DslErrorKind::Syntax, p, format!("expected an integer, found {t}")),
        }
    }

    fn operand(&mut self, op: Option<(char, Pos)>, f: fn(&mut Self) -> Result<Expr, DslError>) -> Result<Expr, DslError> {
        if let (Some((c, p)), Tok::End) = (op, self.peek()) {
            return err(DslErrorKind::Syntax, p, format!("operator '{c}' has no right operand"));
        }
        f(self)
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = match self.peek().clone() {
            Tok::Op(c @ ('+' | '-')) => {
                let p = self.pos();
                self.next();
                let e = self.operand(Some((c, p)), Self::prod)?;
                if c == '-' {
                    Expr::Neg(Box::new(e))
                } else {
                    e
                }
            }
            _ => self.prod()?,
        };
        while let Tok::Op(c @ ('+' | '-')) = self.peek().clone() {
            let p = self.pos();
            self.next();
            let rhs = self.operand(Some((c, p)), Self::prod)?;
            lhs = if c == '+' { Expr::Add(Box::new(lhs), Box::new(rhs)) } else { Expr::Sub(Box::new(lhs), Box::new(rhs)) };
        }
        Ok(lhs)
    }

    fn prod(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.peek().clone() {
            let p = self.pos();
            self.next();
            let rhs = self.operand(Some((c, p)), Self::unary)?;
            lhs = if c == '*' { Expr::Mul(Box::new(lhs), Box::new(rhs)) } else { Expr::Div(Box::new(lhs), Box::new(rhs), p) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if *self.peek() == Tok::Op('-') {
            let p = self.pos();
            self.next();
            return Ok(Expr::Neg(Box::new(self.operand(Some(('-', p)), Self::unary)?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            let p = self.pos();
            self.next();
            if *self.peek() == Tok::End {
                return err(DslErrorKind::Syntax, p, "operator '^' has no right operand");
            }
            if *self.peek() == Tok::Op('-') {
                return err(DslErrorKind::NonPolynomial, self.pos(), "negative powers are not polynomial");
            }
            return Ok(Expr::Pow(Box::new(base), self.int()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        match self.next() {
            (Tok::Num(s), p) => match parse_q(&s) {
                Ok(q) => Ok(Expr::Num(q)),
                Err(_) => err(DslErrorKind::Syntax, p, format!("malformed number '{s}'")),
            },
            (Tok::Ident(s), p) => Ok(Expr::Var(ident(&s, p)?, p)),
            (Tok::Op('('), _) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            (t, p) => err(DslErrorKind::Syntax, p, format!("expected an operand, found {t}")),
        }
    }
}

fn ident(s: &str, p: Pos) -> Result<Var, DslError> {
    let unknown = || err(DslErrorKind::UnknownIdentifier, p, format!("unknown identifier '{s}'"));
    let (head, idx) = s.split_at(1);
    let Ok(k) = idx.parse::<usize>() else { return unknown() };
    if k == 0 || idx.starts_with('0') {
        return unknown();
    }
    match head {
        "t" | "s" => Ok(Var::T(k - 1)),
        "x" => Ok(Var::X(k - 1)),
        "d" => Ok(Var::D(k - 1)),
        _ => unknown(),
    }
}

/// Largest (t, x, d) index used, 1-based.
fn extent(e: &Expr, m: &mut [usize; 3]) {
    match e {
        Expr::Num(_) => {}
        Expr::Var(v, _) => {
            let (slot, k) = match *v {
                Var::T(k) => (0, k),
                Var::X(k) => (1, k),
                Var::D(k) => (2, k),
            };
            m[slot] = m[slot].max(k + 1);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
            extent(a, m);
            extent(b, m);
        }
        Expr::Pow(a, _) | Expr::Neg(a) => extent(a, m),
    }
}

/// Variable layout for evaluation: which kinds are allowed and where they go.
struct Layout {
    nt: Option<usize>,
    n: usize,
    with_d: bool,
}

impl Layout {
    fn nvars(&self) -> usize {
        self.nt.unwrap_or(0) + self.n + if self.with_d { self.n } else { 0 }
    }

    fn index(&self, v: Var, p: Pos) -> Result<usize, DslError> {
        let nt = self.nt.unwrap_or(0);
        let over = |name: &str, k: usize, lim: usize| {
            err(DslErrorKind::ArityOverflow, p, format!("{name}{} exceeds the declared dimension {lim}", k + 1))
        };
        match v {
            Var::T(k) => match self.nt {
                None => err(DslErrorKind::NonPolynomial, p, format!("t{} inside an exponential field; fields are autonomous", k + 1)),
                Some(_) if k >= nt => over("t", k, nt),
                Some(_) => Ok(k),
            },
            Var::X(k) if k >= self.n => over("x", k, self.n),
            Var::X(k) => Ok(nt + k),
            Var::D(_) if !self.with_d => err(DslErrorKind::NonPolynomial, p, "coordinate fields d_i are only allowed inside exp[...]"),
            Var::D(k) if k >= self.n => over("d", k, self.n),
            Var::D(k) => Ok(nt + self.n + k),
        }
    }
}

fn eval(e: &Expr, l: &Layout) -> Result<Poly, DslError> {
    let nv = l.nvars();
    Ok(match e {
        Expr::Num(q) => Poly::constant(nv, q.clone()),
        Expr::Var(v, p) => Poly::var(nv, l.index(*v, *p)?),
        Expr::Add(a, b) => &eval(a, l)? + &eval(b, l)?,
        Expr::Sub(a, b) => &eval(a, l)? - &eval(b, l)?,
        Expr::Mul(a, b) => &eval(a, l)? * &eval(b, l)?,
        Expr::Neg(a) => -&eval(a, l)?,
        Expr::Pow(a, k) => eval(a, l)?.pow_window(*k, None).0,
        Expr::Div(a, b, p) => {
            let d = eval(b, l)?;
            if d.degree().unwrap_or(0) > 0 {
                return err(DslErrorKind::NonPolynomial, *p, "division by a non-constant expression");
            }
            let c = d.constant_term();
            if c.is_zero() {
                return err(DslErrorKind::NonPolynomial, *p, "division by zero");
            }
            eval(a, l)?.scale(&(Q::from_integer(1.into()) / c))
        }
    })
}

/// Dimensions and structure the surface is parsed into; `None` entries are
/// inferred from the largest index used.
#[derive(Clone, Debug)]
pub struct GammaContext {
    pub nt: Option<usize>,
    pub n: Option<usize>,
    /// Default: one parameter per t-coordinate.
    pub dilations: Option<DilationSpec>,
    pub policy: TruncationPolicy,
}

impl GammaContext {
    pub fn new(policy: TruncationPolicy) -> Self {
        GammaContext { nt: None, n: None, dilations: None, policy }
    }
}

fn surface_err(e: impl fmt::Display) -> DslError {
    DslError { kind: DslErrorKind::Surface, line: 1, col: 1, message: e.to_string() }
}

/// Parses a polynomial in t1..tN, x1..xn (`nt` t-variables first).
pub fn parse_poly(text: &str, nt: usize, n: usize) -> Result<Poly, DslError> {
    let mut p = Parser { toks: lex(text)?, k: 0 };
    let e = p.expr()?;
    let (t, at) = p.next();
    if t != Tok::End {
        return err(DslErrorKind::Syntax, at, format!("unexpected {t} after a complete expression"));
    }
    eval(&e, &Layout { nt: Some(nt), n, with_d: false })
}

/// Parses a vector field "Σ p_i(x) d_i" on ℝ^n.
pub fn parse_field(text: &str, n: usize) -> Result<VectorField, DslError> {
    let mut p = Parser { toks: lex(text)?, k: 0 };
    let at = p.pos();
    let e = p.expr()?;
    let (t, end) = p.next();
    if t != Tok::End {
        return err(DslErrorKind::Syntax, end, format!("unexpected {t} after a complete expression"));
    }
    field_from_expr(&e, n, at)
}

fn field_from_expr(e: &Expr, n: usize, at: Pos) -> Result<VectorField, DslError> {
    let l = Layout { nt: None, n, with_d: true };
    let p = eval(e, &l)?;
    let mut comps = vec![Poly::zero(n); n];
    for (m, c) in p.terms() {
        let dpart = &m.0[n..];
        if dpart.iter().sum::<u32>() != 1 {
            return err(DslErrorKind::NonPolynomial, at, "a vector field must be linear in d1..dn");
        }
        let i = dpart.iter().position(|&a| a == 1).expect("one d");
        comps[i].add_term(m.slice(0, n), c.clone());
    }
    VectorField::new(n, comps).map_err(surface_err)
}

/// γ from its text. A single `exp[...]` factor gives an exponential-form
/// surface; a chain `exp[A] ∘ exp[B] ∘ …` is the operator product e^A e^B…,
/// i.e. the point map that applies the first factor first, re-expressed as one
/// exponential.
pub fn parse_gamma_dsl(text: &str, cx: &GammaContext) -> Result<Surface, DslError> {
    let ast = Parser { toks: lex(text)?, k: 0 }.gamma()?;
    let mut m = [0usize; 3];
    match &ast {
        Ast::Vector(v) => v.iter().for_each(|e| extent(e, &mut m)),
        Ast::Chain(fs) => {
            for (a, _, e) in fs.iter().flatten() {
                m[0] = m[0].max(a.len());
                extent(e, &mut m);
            }
        }
    }
    let nt = match cx.nt.or(cx.dilations.as_ref().map(|d| d.n_t())) {
        Some(nt) => nt,
        None if m[0] > 0 => m[0],
        None => return err(DslErrorKind::Syntax, Pos { line: 1, col: 1 }, "no t-variable in the expression; declare N"),
    };
    let n = cx.n.unwrap_or(match &ast {
        Ast::Vector(v) => v.len(),
        Ast::Chain(_) => m[1].max(m[2]).max(1),
    });
    let dil = match &cx.dilations {
        Some(d) => d.clone(),
        None => DilationSpec::standard(nt),
    };
    if dil.n_t() != nt {
        return Err(surface_err(format!("dilations act on R^{}, gamma has {nt} t-variables", dil.n_t())));
    }
    match ast {
        Ast::Vector(v) => {
            if v.len() != n {
                return Err(surface_err(format!("gamma has {} components, n = {n}", v.len())));
            }
            let l = Layout { nt: Some(nt), n, with_d: false };
            let comps = v.iter().map(|e| eval(e, &l)).collect::<Result<Vec<_>, _>>()?;
            let s = JetSeries::new(nt, n, cx.policy, comps).map_err(surface_err)?;
            Surface::from_series(s, dil).map_err(surface_err)
        }
        Ast::Chain(factors) => {
            let mut maps = Vec::new();
            for f in &factors {
                let mut fm: BTreeMap<MultiIndex, VectorField> = BTreeMap::new();
                for (a, at, e) in f {
                    if a.len() != nt {
                        return err(DslErrorKind::ArityOverflow, *at, format!("multi-index of length {}, N = {nt}", a.len()));
                    }
                    if a.iter().all(|&x| x == 0) {
                        return err(DslErrorKind::Syntax, *at, "multi-index must be nonzero");
                    }
                    let v = field_from_expr(e, n, *at)?;
                    let slot = fm.entry(MultiIndex(a.clone())).or_insert_with(|| VectorField::zero(0, n));
                    *slot = slot.add(&v).map_err(surface_err)?;
                }
                maps.push(fm);
            }
            if maps.len() == 1 {
                let fm = maps.pop().expect("one factor");
                return Surface::from_plain_fields(n, fm, dil, cx.policy).map_err(surface_err);
            }
            let mut acc = JetSeries::identity_map(nt, n, cx.policy);
            for fm in &maps {
                let g = exp_map(&VectorField::from_t_coefficients(nt, n, fm), cx.policy);
                acc = g.compose(&acc).map_err(surface_err)?;
            }
            let composite = Surface::from_series(acc, dil.clone()).map_err(surface_err)?;
            let fields = extract_exp_fields(&composite).map_err(surface_err)?;
            Surface::from_fields(n, fields, dil, cx.policy).map_err(surface_err)
        }
    }
}

fn render_alpha(a: &MultiIndex) -> String {
    format!("({})", a.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

/// Text that parses back to the same surface (same form, same terms).
pub fn print_surface(g: &Surface) -> String {
    match &g.form {
        SurfaceForm::Series(s) => {
            let parts: Vec<String> = (0..s.arity()).map(|i| s.render_comp(i)).collect();
            if parts.len() == 1 {
                parts[0].clone()
            } else {
                format!("[{}]", parts.join(", "))
            }
        }
        SurfaceForm::Exponential(m) if m.is_empty() => {
            // the identity: exp of the zero field at t1
            let a = MultiIndex::unit(g.nt(), 0);
            format!("exp[{}->0*d1]", render_alpha(&a))
        }
        SurfaceForm::Exponential(m) => {
            let terms: Vec<String> = m.iter().map(|(a, w)| format!("{}->{}", render_alpha(a), w.field.render())).collect();
            format!("exp[{}]", terms.join(", "))
        }
    }
}

/// Exact equality of two surfaces: same form, dimensions, dilations and terms.
pub fn same_surface(a: &Surface, b: &Surface) -> bool {
    if a.n() != b.n() || a.nt() != b.nt() || a.dilations != b.dilations {
        return false;
    }
    match (&a.form, &b.form) {
        (SurfaceForm::Series(x), SurfaceForm::Series(y)) => x == y,
        (SurfaceForm::Exponential(x), SurfaceForm::Exponential(y)) => {
            let nz = |m: &FieldMap| -> Vec<(MultiIndex, VectorField, Vec<u32>)> {
                m.iter().filter(|(_, w)| !w.is_zero()).map(|(a, w)| (a.clone(), w.field.clone(), w.degree().to_vec())).collect()
            };
            nz(x) == nz(y)
        }
        _ => false,
    }
}
