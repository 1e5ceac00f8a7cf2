//! Expression trees, the infix parser and the canonical printer.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = atom [ "^" unary ] ;            (* right-associative *)
//! atom    = number | constant | variable | func "(" expr ")" | "(" expr ")" ;
//! variable = "x" | "x1" | "x2" ;
//! constant = "pi" | "e" ;
//! func    = "exp" | "log" | "sqrt" | "sin" | "cos" | "sinh" | "cosh" | "abs" | "floor" ;
//! ```

use std::fmt;
use std::sync::Arc;

use super::jet::Jet;
use super::FuncModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Abs,
    Floor,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "abs" => Func::Abs,
            "floor" => Func::Floor,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Abs => "abs",
            Func::Floor => "floor",
        }
    }

    /// `abs` and `floor` have no usable derivatives.
    pub fn is_smooth(self) -> bool {
        !matches!(self, Func::Abs | Func::Floor)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Abs => v.abs(),
            Func::Floor => v.floor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Immutable expression node. Children are shared, so composing large
/// fields out of smaller ones is cheap.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Arc<Expr>),
    Call(Func, Arc<Expr>),
    Binary(BinOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn constant(v: f64) -> Arc<Expr> {
        Arc::new(Expr::Const(v))
    }

    pub fn var(i: usize) -> Arc<Expr> {
        Arc::new(Expr::Var(i))
    }

    pub fn call(f: Func, arg: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Call(f, arg))
    }

    pub fn binary(op: BinOp, a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Binary(op, a, b))
    }

    pub fn neg(a: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Neg(a))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval(x),
            Expr::Call(f, a) => f.apply(a.eval(x)),
            Expr::Binary(op, a, b) => {
                let u = a.eval(x);
                match op {
                    BinOp::Add => u + b.eval(x),
                    BinOp::Sub => u - b.eval(x),
                    BinOp::Mul => u * b.eval(x),
                    BinOp::Div => u / b.eval(x),
                    BinOp::Pow => match b.as_ref() {
                        Expr::Const(c) if c.fract() == 0.0 && c.abs() < 1024.0 => u.powi(*c as i32),
                        _ => u.powf(b.eval(x)),
                    },
                }
            }
        }
    }

    /// Evaluate as a truncated Taylor jet. Fails on non-smooth nodes when
    /// `order > 0`.
    pub fn eval_jet(&self, x: &[f64], order: usize) -> Result<Jet, FuncModelError> {
        let dim = x.len();
        self.jet_rec(x, dim, order)
    }

    fn jet_rec(&self, x: &[f64], dim: usize, order: usize) -> Result<Jet, FuncModelError> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(dim, order, *c),
            Expr::Var(i) => {
                if *i >= dim {
                    return Err(FuncModelError::DimensionMismatch {
                        expected: *i + 1,
                        got: dim,
                    });
                }
                Jet::variable(dim, order, *i, x[*i])
            }
            Expr::Neg(a) => -&a.jet_rec(x, dim, order)?,
            Expr::Call(f, a) => {
                let inner = a.jet_rec(x, dim, order)?;
                match f {
                    Func::Exp => inner.exp(),
                    Func::Log => inner.ln(),
                    Func::Sqrt => inner.sqrt(),
                    Func::Sin => inner.sin(),
                    Func::Cos => inner.cos(),
                    Func::Sinh => inner.sinh(),
                    Func::Cosh => inner.cosh(),
                    Func::Abs | Func::Floor => {
                        if order > 0 {
                            return Err(FuncModelError::NotSmooth(f.name().to_string()));
                        }
                        Jet::constant(dim, 0, f.apply(inner.value()))
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let u = a.jet_rec(x, dim, order)?;
                match op {
                    BinOp::Add => &u + &b.jet_rec(x, dim, order)?,
                    BinOp::Sub => &u - &b.jet_rec(x, dim, order)?,
                    BinOp::Mul => &u * &b.jet_rec(x, dim, order)?,
                    BinOp::Div => &u * &b.jet_rec(x, dim, order)?.recip(),
                    BinOp::Pow => match b.as_ref() {
                        Expr::Const(c) if c.fract() == 0.0 && c.abs() < 1024.0 => u.powi(*c as i32),
                        Expr::Const(c) => u.powf(*c),
                        _ => {
                            let v = b.jet_rec(x, dim, order)?;
                            (&v * &u.ln()).exp()
                        }
                    },
                }
            }
        })
    }

    /// True when no `abs`/`floor` node occurs.
    pub fn is_smooth(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Neg(a) => a.is_smooth(),
            Expr::Call(f, a) => f.is_smooth() && a.is_smooth(),
            Expr::Binary(_, a, b) => a.is_smooth() && b.is_smooth(),
        }
    }

    /// Number of variables referenced (highest index + 1).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
        }
    }

    /// Symbolic `∂/∂x_var`, with constants folded. Fails on `abs`/`floor`.
    pub fn diff(self: &Arc<Expr>, var: usize) -> Result<Arc<Expr>, FuncModelError> {
        use BinOp::*;
        let c = Expr::constant;
        Ok(match self.as_ref() {
            Expr::Const(_) => c(0.0),
            Expr::Var(i) => c(if *i == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg_s(a.diff(var)?),
            Expr::Call(f, a) => {
                let da = a.diff(var)?;
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Log => div_s(c(1.0), a.clone()),
                    Func::Sqrt => div_s(c(0.5), self.clone()),
                    Func::Sin => Expr::call(Func::Cos, a.clone()),
                    Func::Cos => neg_s(Expr::call(Func::Sin, a.clone())),
                    Func::Sinh => Expr::call(Func::Cosh, a.clone()),
                    Func::Cosh => Expr::call(Func::Sinh, a.clone()),
                    Func::Abs | Func::Floor => {
                        return Err(FuncModelError::NotSmooth(f.name().to_string()))
                    }
                };
                mul_s(outer, da)
            }
            Expr::Binary(op, a, b) => {
                let da = a.diff(var)?;
                let db = b.diff(var)?;
                match op {
                    Add => add_s(da, db),
                    Sub => add_s(da, neg_s(db)),
                    Mul => add_s(mul_s(da, b.clone()), mul_s(a.clone(), db)),
                    Div => div_s(
                        add_s(mul_s(da, b.clone()), neg_s(mul_s(a.clone(), db))),
                        pow_s(b.clone(), 2.0),
                    ),
                    Pow => match b.as_ref() {
                        Expr::Const(k) => mul_s(mul_s(c(*k), pow_s(a.clone(), k - 1.0)), da),
                        _ => {
                            // d(a^b) = a^b (b' ln a + b a'/a)
                            let inner = add_s(
                                mul_s(db, Expr::call(Func::Log, a.clone())),
                                div_s(mul_s(b.clone(), da), a.clone()),
                            );
                            mul_s(self.clone(), inner)
                        }
                    },
                }
            }
        })
    }

    /// Replace each variable `x_i` by `subs[i]`.
    pub fn substitute(self: &Arc<Expr>, subs: &[Arc<Expr>]) -> Arc<Expr> {
        match self.as_ref() {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => subs.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::neg(a.substitute(subs)),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(subs)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(subs), b.substitute(subs)),
        }
    }
}

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(v) => Some(*v),
        _ => None,
    }
}

fn neg_s(a: Arc<Expr>) -> Arc<Expr> {
    match a.as_ref() {
        Expr::Const(v) => Expr::constant(-v),
        Expr::Neg(inner) => inner.clone(),
        _ => Expr::neg(a),
    }
}

fn add_s(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::binary(BinOp::Add, a, b),
    }
}

fn mul_s(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::constant(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::binary(BinOp::Mul, a, b),
    }
}

fn div_s(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::constant(x / y),
        (Some(x), _) if x == 0.0 => Expr::constant(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::binary(BinOp::Div, a, b),
    }
}

fn pow_s(a: Arc<Expr>, k: f64) -> Arc<Expr> {
    if k == 0.0 {
        return Expr::constant(1.0);
    }
    if k == 1.0 {
        return a;
    }
    match as_const(&a) {
        Some(x) => Expr::constant(x.powf(k)),
        None => Expr::binary(BinOp::Pow, a, Expr::constant(k)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "(-{})", -c)
                } else if c.is_infinite() {
                    write!(f, "(1/0)")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, FuncModelError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| FuncModelError::Syntax {
                position: start,
                message: format!("malformed number '{lit}'"),
            })?;
            out.push((Token::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((Token::Ident(text[start..i].to_string()), start));
        } else if "+-*/^".contains(c) {
            out.push((Token::Op(c), i));
            i += 1;
        } else if c == '(' {
            out.push((Token::LParen, i));
            i += 1;
        } else if c == ')' {
            out.push((Token::RParen, i));
            i += 1;
        } else {
            return Err(FuncModelError::Syntax {
                position: i,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FuncModelError> {
        Err(FuncModelError::Syntax {
            position: self.position(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Arc<Expr>, FuncModelError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Arc<Expr>, FuncModelError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Arc<Expr>, FuncModelError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::neg(self.unary()?))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Arc<Expr>, FuncModelError> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Arc<Expr>, FuncModelError> {
        let start = self.position();
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::constant(v))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x" | "x1" => return Ok(Expr::var(0)),
                    "x2" => return Ok(Expr::var(1)),
                    "pi" => return Ok(Expr::constant(std::f64::consts::PI)),
                    "e" => return Ok(Expr::constant(std::f64::consts::E)),
                    _ => {}
                }
                let func =
                    Func::from_name(&name).ok_or_else(|| FuncModelError::UnknownIdentifier {
                        name: name.clone(),
                        position: start,
                    })?;
                if self.peek() != Some(&Token::LParen) {
                    return self.err(format!("expected '(' after function '{name}'"));
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::call(func, arg))
            }
            Some(Token::RParen) => self.err("unexpected ')'"),
            Some(Token::Op(c)) => self.err(format!("unexpected operator '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), FuncModelError> {
        if self.peek() == Some(&Token::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            self.err("expected ')'")
        }
    }
}

/// Parse an infix expression into a tree.
pub fn parse(text: &str) -> Result<Arc<Expr>, FuncModelError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return parser.err("trailing input");
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_derivative_matches_jet() {
        for text in [
            "x*sqrt(1+x^2)",
            "exp(-x^2/2)*sin(3*x)",
            "x^x",
            "log(cosh(x))/(1+x^2)",
        ] {
            let e = parse(text).unwrap();
            let d2 = e.diff(0).unwrap().diff(0).unwrap();
            for &x in &[0.3, 1.1, 2.5] {
                let want = e.eval_jet(&[x], 2).unwrap().derivative(&[2]);
                let got = d2.eval(&[x]);
                assert!(
                    (got - want).abs() < 1e-12 * (1.0 + want.abs()),
                    "{text} at {x}: {got} vs {want}"
                );
            }
        }
        assert!(parse("abs(x)").unwrap().diff(0).is_err());
        assert_eq!(
            parse("3*x1*x2").unwrap().diff(1).unwrap().eval(&[2.0, 5.0]),
            6.0
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("-x^2").unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.eval(&[0.0]), 512.0);
        let e = parse("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(&[0.0]), -4.0);
        let e = parse("x^-2").unwrap();
        assert_eq!(e.eval(&[2.0]), 0.25);
        let e = parse("8/4/2").unwrap();
        assert_eq!(e.eval(&[0.0]), 1.0);
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1e-3").unwrap().eval(&[]), 1e-3);
        assert_eq!(parse("2.5E2*x").unwrap().eval(&[2.0]), 500.0);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("exp(x +)") {
            Err(FuncModelError::Syntax { position, .. }) => assert_eq!(position, 7),
            other => panic!("unexpected {other:?}"),
        }
        match parse("foo(x)") {
            Err(FuncModelError::UnknownIdentifier { name, position }) => {
                assert_eq!(name, "foo");
                assert_eq!(position, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("(x").is_err());
        assert!(parse("x x").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn printed_form_reparses() {
        let e = parse("exp(-sqrt(x^6+cos(x)+2))*floor(x^2+2) - 3e-4/x").unwrap();
        let back = parse(&e.to_string()).unwrap();
        for &x in &[-1.3, 0.2, 0.9, 2.2] {
            assert_eq!(e.eval(&[x]), back.eval(&[x]));
        }
    }

    #[test]
    fn variable_power_uses_exp_log() {
        let e = parse("x^x").unwrap();
        let j = e.eval_jet(&[2.0], 1).unwrap();
        // d/dx x^x = x^x (ln x + 1)
        let expected = 4.0 * (2f64.ln() + 1.0);
        assert!((j.derivative(&[1]) - expected).abs() < 1e-12);
    }
}
