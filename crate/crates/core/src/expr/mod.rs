//! Immutable, hash-consed symbolic expressions over named real variables.
//!
//! Every node is interned in a process-wide table, so structurally equal
//! subtrees are the same allocation and compare by identity. Two families of
//! constructors exist: the `raw_*` ones intern exactly the requested node,
//! while the plain ones (also reachable through the arithmetic operators)
//! apply local rewrite rules and canonical operand ordering first.

mod diff;
mod parse;
mod simplify;
mod tape;

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, Mutex, Weak};

pub use diff::{diff, diff_raw};
pub use parse::parse;
pub use simplify::{canonicalize, simplify};
pub use tape::{eval, Env, Tape, TapeScalar};

/// Elementary functions in the expression basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

/// Node kinds. Children are themselves interned expressions.
#[derive(Debug, Clone)]
pub enum Kind {
    Const(f64),
    Var(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Func(Func, Expr),
}

struct Node {
    kind: Kind,
    id: u64,
    shash: u64,
}

/// A shared handle to an interned expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Const(u64),
    Var(Arc<str>),
    Neg(u64),
    Add(u64, u64),
    Sub(u64, u64),
    Mul(u64, u64),
    Div(u64, u64),
    Pow(u64, i32),
    Func(Func, u64),
}

struct Interner {
    map: HashMap<Key, Weak<Node>>,
    next_id: u64,
    purge_at: usize,
}

static INTERNER: LazyLock<Mutex<Interner>> = LazyLock::new(|| {
    Mutex::new(Interner {
        map: HashMap::new(),
        next_id: 1,
        purge_at: 1 << 16,
    })
});

fn key_of(kind: &Kind) -> Key {
    match kind {
        Kind::Const(c) => Key::Const(c.to_bits()),
        Kind::Var(v) => Key::Var(v.clone()),
        Kind::Neg(a) => Key::Neg(a.id()),
        Kind::Add(a, b) => Key::Add(a.id(), b.id()),
        Kind::Sub(a, b) => Key::Sub(a.id(), b.id()),
        Kind::Mul(a, b) => Key::Mul(a.id(), b.id()),
        Kind::Div(a, b) => Key::Div(a.id(), b.id()),
        Kind::Pow(a, n) => Key::Pow(a.id(), *n),
        Kind::Func(f, a) => Key::Func(*f, a.id()),
    }
}

fn structural_hash(kind: &Kind) -> u64 {
    let mut h = DefaultHasher::new();
    match kind {
        Kind::Const(c) => (0u8, c.to_bits()).hash(&mut h),
        Kind::Var(v) => (1u8, &**v).hash(&mut h),
        Kind::Neg(a) => (2u8, a.shash()).hash(&mut h),
        Kind::Add(a, b) => (3u8, a.shash(), b.shash()).hash(&mut h),
        Kind::Sub(a, b) => (4u8, a.shash(), b.shash()).hash(&mut h),
        Kind::Mul(a, b) => (5u8, a.shash(), b.shash()).hash(&mut h),
        Kind::Div(a, b) => (6u8, a.shash(), b.shash()).hash(&mut h),
        Kind::Pow(a, n) => (7u8, a.shash(), *n).hash(&mut h),
        Kind::Func(f, a) => (8u8, *f, a.shash()).hash(&mut h),
    }
    h.finish()
}

fn intern(kind: Kind) -> Expr {
    let key = key_of(&kind);
    let mut table = INTERNER.lock().unwrap_or_else(|p| p.into_inner());
    if let Some(node) = table.map.get(&key).and_then(Weak::upgrade) {
        return Expr(node);
    }
    let id = table.next_id;
    table.next_id += 1;
    let shash = structural_hash(&kind);
    let node = Arc::new(Node { kind, id, shash });
    table.map.insert(key, Arc::downgrade(&node));
    if table.map.len() > table.purge_at {
        table.map.retain(|_, w| w.strong_count() > 0);
        table.purge_at = (2 * table.map.len()).max(1 << 16);
    }
    Expr(node)
}

/// Number of live entries in the interning table (dead weak entries excluded).
pub fn interned_count() -> usize {
    let table = INTERNER.lock().unwrap_or_else(|p| p.into_inner());
    table.map.values().filter(|w| w.strong_count() > 0).count()
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        debug_assert!(c.is_finite(), "non-finite constant {c}");
        // -0.0 and 0.0 intern to the same node
        let c = if c == 0.0 { 0.0 } else { c };
        intern(Kind::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(name: &str) -> Expr {
        intern(Kind::Var(Arc::from(name)))
    }

    pub fn raw_neg(a: &Expr) -> Expr {
        intern(Kind::Neg(a.clone()))
    }
    pub fn raw_add(a: &Expr, b: &Expr) -> Expr {
        intern(Kind::Add(a.clone(), b.clone()))
    }
    pub fn raw_sub(a: &Expr, b: &Expr) -> Expr {
        intern(Kind::Sub(a.clone(), b.clone()))
    }
    pub fn raw_mul(a: &Expr, b: &Expr) -> Expr {
        intern(Kind::Mul(a.clone(), b.clone()))
    }
    pub fn raw_div(a: &Expr, b: &Expr) -> Expr {
        intern(Kind::Div(a.clone(), b.clone()))
    }
    pub fn raw_pow(a: &Expr, n: i32) -> Expr {
        intern(Kind::Pow(a.clone(), n))
    }
    pub fn raw_func(f: Func, a: &Expr) -> Expr {
        intern(Kind::Func(f, a.clone()))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Unique identity of the interned node.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Deterministic structural hash (independent of interning order).
    pub fn shash(&self) -> u64 {
        self.0.shash
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self, c: f64) -> bool {
        self.as_const() == Some(c)
    }

    pub fn is_zero(&self) -> bool {
        self.is_const(0.0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.kind() {
            Kind::Const(_) | Kind::Var(_) => vec![],
            Kind::Neg(a) | Kind::Pow(a, _) | Kind::Func(_, a) => vec![a],
            Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => vec![a, b],
        }
    }

    /// Unique nodes reachable from this root.
    pub fn node_count(&self) -> usize {
        count_nodes(std::slice::from_ref(self))
    }

    /// Node count of the fully expanded tree (shared subtrees counted repeatedly).
    pub fn tree_size(&self) -> f64 {
        let mut memo: HashMap<u64, f64> = HashMap::new();
        for n in postorder(std::slice::from_ref(self)) {
            let s = 1.0 + n.children().iter().map(|c| memo[&c.id()]).sum::<f64>();
            memo.insert(n.id(), s);
        }
        memo[&self.id()]
    }

    pub fn free_vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        for n in postorder(std::slice::from_ref(self)) {
            if let Kind::Var(v) = n.kind() {
                out.insert(v.clone());
            }
        }
        out
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.free_vars().iter().any(|v| &**v == var)
    }

    /// Replace variables by expressions, rebuilding with the simplifying constructors.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        let mut memo: HashMap<u64, Expr> = HashMap::new();
        for n in postorder(std::slice::from_ref(self)) {
            let r = match n.kind() {
                Kind::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| n.clone()),
                _ => rebuild(&n, |c| memo[&c.id()].clone()),
            };
            memo.insert(n.id(), r);
        }
        memo.remove(&self.id()).expect("root visited")
    }

    /// Structural rendering, e.g. `Sum(Pow(Var u, 2), Var v)`.
    pub fn structure(&self) -> String {
        match self.kind() {
            Kind::Const(c) => format!("Const {}", fmt_const(*c)),
            Kind::Var(v) => format!("Var {v}"),
            Kind::Neg(a) => format!("Neg({})", a.structure()),
            Kind::Add(a, b) => format!("Sum({}, {})", a.structure(), b.structure()),
            Kind::Sub(a, b) => format!("Difference({}, {})", a.structure(), b.structure()),
            Kind::Mul(a, b) => format!("Product({}, {})", a.structure(), b.structure()),
            Kind::Div(a, b) => format!("Quotient({}, {})", a.structure(), b.structure()),
            Kind::Pow(a, n) => format!("Pow({}, {n})", a.structure()),
            Kind::Func(f, a) => {
                let name = f.name();
                let mut cap = name[..1].to_uppercase();
                cap.push_str(&name[1..]);
                format!("{cap}({})", a.structure())
            }
        }
    }
}

/// Rebuild a node with mapped children through the simplifying constructors.
pub(crate) fn rebuild(n: &Expr, child: impl Fn(&Expr) -> Expr) -> Expr {
    match n.kind() {
        Kind::Const(_) | Kind::Var(_) => n.clone(),
        Kind::Neg(a) => child(a).neg_s(),
        Kind::Add(a, b) => Expr::add_s(&child(a), &child(b)),
        Kind::Sub(a, b) => Expr::sub_s(&child(a), &child(b)),
        Kind::Mul(a, b) => Expr::mul_s(&child(a), &child(b)),
        Kind::Div(a, b) => Expr::div_s(&child(a), &child(b)),
        Kind::Pow(a, k) => child(a).powi(*k),
        Kind::Func(f, a) => Expr::func(*f, &child(a)),
    }
}

/// Unique nodes of a set of roots in post-order (children before parents).
pub(crate) fn postorder(roots: &[Expr]) -> Vec<Expr> {
    let mut seen: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    let mut stack: Vec<(Expr, bool)> = roots.iter().rev().map(|r| (r.clone(), false)).collect();
    while let Some((n, expanded)) = stack.pop() {
        if expanded {
            out.push(n);
            continue;
        }
        if seen.contains(&n.id()) {
            continue;
        }
        seen.insert(n.id());
        stack.push((n.clone(), true));
        for c in n.children().into_iter().rev() {
            if !seen.contains(&c.id()) {
                stack.push((c.clone(), false));
            }
        }
    }
    out
}

/// Unique nodes shared across several roots.
pub fn count_nodes(roots: &[Expr]) -> usize {
    postorder(roots).len()
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}
impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state)
    }
}

fn kind_rank(k: &Kind) -> u8 {
    match k {
        Kind::Const(_) => 0,
        Kind::Var(_) => 1,
        Kind::Neg(_) => 2,
        Kind::Add(..) => 3,
        Kind::Sub(..) => 4,
        Kind::Mul(..) => 5,
        Kind::Div(..) => 6,
        Kind::Pow(..) => 7,
        Kind::Func(..) => 8,
    }
}

/// Total structural order used to canonicalize commutative operands.
/// Constants sort first; the rest by structural hash, ties broken structurally.
pub(crate) fn canon_cmp(a: &Expr, b: &Expr) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    match (a.kind(), b.kind()) {
        (Kind::Const(x), Kind::Const(y)) => return x.total_cmp(y),
        (Kind::Const(_), _) => return Ordering::Less,
        (_, Kind::Const(_)) => return Ordering::Greater,
        _ => {}
    }
    a.shash().cmp(&b.shash()).then_with(|| structural_cmp(a, b))
}

fn structural_cmp(a: &Expr, b: &Expr) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let ra = kind_rank(a.kind());
    let rb = kind_rank(b.kind());
    if ra != rb {
        return ra.cmp(&rb);
    }
    match (a.kind(), b.kind()) {
        (Kind::Const(x), Kind::Const(y)) => x.total_cmp(y),
        (Kind::Var(x), Kind::Var(y)) => x.cmp(y),
        (Kind::Pow(x, n), Kind::Pow(y, m)) => n.cmp(m).then_with(|| structural_cmp(x, y)),
        (Kind::Func(f, x), Kind::Func(g, y)) => f.cmp(g).then_with(|| structural_cmp(x, y)),
        _ => {
            let ca = a.children();
            let cb = b.children();
            for (x, y) in ca.iter().zip(cb.iter()) {
                let o = structural_cmp(x, y);
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        }
    }
}

pub(crate) fn fmt_const(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:?}")
    }
}

// Precedence levels used by the printer: sum 1, product 2, unary minus 3, power 4, atom 5.
fn prec(e: &Expr) -> u8 {
    match e.kind() {
        Kind::Add(..) | Kind::Sub(..) => 1,
        Kind::Mul(..) | Kind::Div(..) => 2,
        Kind::Neg(_) => 3,
        Kind::Const(c) if *c < 0.0 => 3,
        Kind::Pow(..) => 4,
        _ => 5,
    }
}

fn write_with(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if prec(e) < min_prec {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.kind() {
        Kind::Const(c) => write!(f, "{}", fmt_const(*c)),
        Kind::Var(v) => write!(f, "{v}"),
        Kind::Neg(a) => {
            write!(f, "-")?;
            write_with(f, a, 3)
        }
        Kind::Add(a, b) => {
            write_with(f, a, 1)?;
            write!(f, " + ")?;
            write_with(f, b, 2)
        }
        Kind::Sub(a, b) => {
            write_with(f, a, 1)?;
            write!(f, " - ")?;
            write_with(f, b, 2)
        }
        Kind::Mul(a, b) => {
            write_with(f, a, 2)?;
            write!(f, "*")?;
            write_with(f, b, 3)
        }
        Kind::Div(a, b) => {
            write_with(f, a, 2)?;
            write!(f, "/")?;
            write_with(f, b, 3)
        }
        Kind::Pow(a, n) => {
            write_with(f, a, 5)?;
            if *n < 0 {
                write!(f, "^({n})")
            } else {
                write!(f, "^{n}")
            }
        }
        Kind::Func(g, a) => {
            write!(f, "{}(", g.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.structure())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $s:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$s(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$s(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$s(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$s(self, &rhs)
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$s(self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$s(&self, &Expr::constant(rhs))
            }
        }
    };
}

binop!(Add, add, add_s);
binop!(Sub, sub, sub_s);
binop!(Mul, mul, mul_s);
binop!(Div, div, div_s);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_s()
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_s()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_shares_identity() {
        let a = Expr::raw_add(&Expr::var("u"), &Expr::constant(2.0));
        let b = Expr::raw_add(&Expr::var("u"), &Expr::constant(2.0));
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
        let c = Expr::raw_add(&Expr::constant(2.0), &Expr::var("u"));
        assert_ne!(a, c);
    }

    #[test]
    fn negative_zero_interns_as_zero() {
        assert_eq!(Expr::constant(-0.0), Expr::zero());
    }

    #[test]
    fn structure_rendering() {
        let e = parse("u^2 + v").unwrap();
        assert_eq!(e.structure(), "Sum(Pow(Var u, 2), Var v)");
        let e = parse("sin(u)*cos(v)").unwrap();
        assert_eq!(e.structure(), "Product(Sin(Var u), Cos(Var v))");
    }

    #[test]
    fn printing_respects_precedence() {
        for src in [
            "a - (b - c)",
            "(a + b)*c",
            "-(u^2)",
            "(-u)^2",
            "a/(b*c)",
            "u^(-2)",
            "a*-b",
        ] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
    }

    #[test]
    fn node_count_counts_shared_once() {
        let u = Expr::var("u");
        let s = Expr::raw_func(Func::Sin, &u);
        let e = Expr::raw_mul(&s, &s);
        assert_eq!(e.node_count(), 3);
        assert_eq!(e.tree_size(), 5.0);
    }

    #[test]
    fn substitute_replaces_vars() {
        let e = parse("x1^2 + x2").unwrap();
        let mut m = BTreeMap::new();
        m.insert("x1".to_string(), Expr::var("u"));
        m.insert("x2".to_string(), Expr::constant(3.0));
        let s = e.substitute(&m);
        let env = Env::from([("u", 2.0)]);
        assert_eq!(eval(&s, &env).unwrap(), 7.0);
    }
}
