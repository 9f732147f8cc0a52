//! Lexer, recursive-descent parser and canonical printer for ATL formulas.
//!
//! Concrete syntax, loosest binding first:
//!
//! ```text
//! atlFormula : '<<' players '>>' '@' implExpr
//!            | '<<' players '>>' '#' implExpr
//!            | '<<' players '>>' '~' implExpr
//!            | '<<' players '>>' implExpr 'U' implExpr
//!            | implExpr
//! implExpr   : orExpr (('=>' | '=') orExpr)*
//! orExpr     : andExpr ('or' andExpr)*
//! andExpr    : notExpr ('and' notExpr)*
//! notExpr    : 'not' notExpr | atomExp
//! atomExp    : '(' atlFormula ')' | ATOM | 'true' | 'false'
//! players    : (ATOM (',' ATOM)*)?
//! ```
//!
//! `@`, `#` and `~` stand for next, always and eventually.

use std::fmt;

use thiserror::Error;

/// Nesting depth at which parsing gives up.
pub const MAX_DEPTH: usize = 10_000;

/// Player names as written between `<<` and `>>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Players(pub Vec<String>);

impl Players {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(names: I) -> Self {
        Players(names.into_iter().map(Into::into).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for Players {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<<{}>>", self.0.join(","))
    }
}

/// ATL formula syntax tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Next(Players, Box<Formula>),
    Always(Players, Box<Formula>),
    Eventually(Players, Box<Formula>),
    Until(Players, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imply(a: Formula, b: Formula) -> Self {
        Formula::Imply(Box::new(a), Box::new(b))
    }

    pub fn next(players: Players, f: Formula) -> Self {
        Formula::Next(players, Box::new(f))
    }

    pub fn always(players: Players, f: Formula) -> Self {
        Formula::Always(players, Box::new(f))
    }

    pub fn eventually(players: Players, f: Formula) -> Self {
        Formula::Eventually(players, Box::new(f))
    }

    pub fn until(players: Players, a: Formula, b: Formula) -> Self {
        Formula::Until(players, Box::new(a), Box::new(b))
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => vec![],
            Formula::Not(f)
            | Formula::Next(_, f)
            | Formula::Always(_, f)
            | Formula::Eventually(_, f) => vec![f],
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Imply(a, b)
            | Formula::Until(_, a, b) => vec![a, b],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    CoalitionOpen,
    CoalitionClose,
    Next,
    Always,
    Eventually,
    Until,
    Imply,
    Or,
    And,
    Not,
    True,
    False,
    LParen,
    RParen,
    Comma,
    Atom,
}

impl TokenKind {
    fn describe(self) -> &'static str {
        match self {
            TokenKind::CoalitionOpen => "'<<'",
            TokenKind::CoalitionClose => "'>>'",
            TokenKind::Next => "'@'",
            TokenKind::Always => "'#'",
            TokenKind::Eventually => "'~'",
            TokenKind::Until => "'U'",
            TokenKind::Imply => "'=>'",
            TokenKind::Or => "'or'",
            TokenKind::And => "'and'",
            TokenKind::Not => "'not'",
            TokenKind::True => "'true'",
            TokenKind::False => "'false'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::Comma => "','",
            TokenKind::Atom => "proposition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Byte offset of the first character.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at offset {offset}")]
    UnexpectedCharacter { offset: usize, ch: char },
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    SyntaxError {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("malformed player list at offset {offset}: {message}")]
    UnknownCoalitionSyntax { offset: usize, message: String },
    #[error("formula nested deeper than {MAX_DEPTH} levels at offset {offset}")]
    TooDeep { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match *self {
            ParseError::UnexpectedCharacter { offset, .. }
            | ParseError::SyntaxError { offset, .. }
            | ParseError::UnknownCoalitionSyntax { offset, .. }
            | ParseError::TooDeep { offset } => offset,
        }
    }
}

fn is_atom_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        "not" => TokenKind::Not,
        "and" => TokenKind::And,
        "or" => TokenKind::Or,
        "U" => TokenKind::Until,
        _ => return None,
    })
}

/// Whether `name` can be written as a bare proposition or player name.
pub fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.chars().all(is_atom_char) && keyword(name).is_none()
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let rest = &text[offset..];
        let (kind, len) = if rest.starts_with("<<") {
            (TokenKind::CoalitionOpen, 2)
        } else if rest.starts_with(">>") {
            (TokenKind::CoalitionClose, 2)
        } else if rest.starts_with("=>") {
            (TokenKind::Imply, 2)
        } else {
            match c {
                '=' => (TokenKind::Imply, 1),
                '@' => (TokenKind::Next, 1),
                '#' => (TokenKind::Always, 1),
                '~' => (TokenKind::Eventually, 1),
                '(' => (TokenKind::LParen, 1),
                ')' => (TokenKind::RParen, 1),
                ',' => (TokenKind::Comma, 1),
                c if is_atom_char(c) => {
                    let len = rest
                        .char_indices()
                        .find(|&(_, c)| !is_atom_char(c))
                        .map_or(rest.len(), |(i, _)| i);
                    (keyword(&rest[..len]).unwrap_or(TokenKind::Atom), len)
                }
                ch => return Err(ParseError::UnexpectedCharacter { offset, ch }),
            }
        };
        tokens.push(Token {
            kind,
            lexeme: rest[..len].to_string(),
            offset,
        });
        while chars.peek().is_some_and(|&(i, _)| i < offset + len) {
            chars.next();
        }
    }
    Ok(tokens)
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        depth: 0,
        end: text.len(),
    };
    let formula = parser.formula()?;
    match parser.peek() {
        None => Ok(formula),
        Some(tok) => Err(parser.unexpected(tok.offset, &["end of input"])),
    }
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn bump(&mut self) -> &Token {
        let tok = &self.tokens[self.pos];
        self.pos += 1;
        tok
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek_kind() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, offset: usize, expected: &[&str]) -> ParseError {
        ParseError::SyntaxError {
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self
                .tokens
                .iter()
                .find(|t| t.offset == offset)
                .map_or_else(|| "end of input".to_string(), |t| format!("'{}'", t.lexeme)),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        if self.eat(kind) {
            Ok(())
        } else {
            Err(self.unexpected(self.offset(), &[kind.describe()]))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep {
                offset: self.offset(),
            });
        }
        Ok(())
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let result = stacker::maybe_grow(64 * 1024, 1024 * 1024, || {
            if self.peek_kind() == Some(TokenKind::CoalitionOpen) {
                self.quantified()
            } else {
                self.implication()
            }
        });
        self.depth -= 1;
        result
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let players = self.players()?;
        match self.peek_kind() {
            Some(TokenKind::Next) => {
                self.bump();
                Ok(Formula::next(players, self.implication()?))
            }
            Some(TokenKind::Always) => {
                self.bump();
                Ok(Formula::always(players, self.implication()?))
            }
            Some(TokenKind::Eventually) => {
                self.bump();
                Ok(Formula::eventually(players, self.implication()?))
            }
            Some(
                TokenKind::Not
                | TokenKind::LParen
                | TokenKind::Atom
                | TokenKind::True
                | TokenKind::False,
            ) => {
                let lhs = self.implication()?;
                self.expect(TokenKind::Until)?;
                let rhs = self.implication()?;
                Ok(Formula::until(players, lhs, rhs))
            }
            _ => Err(self.unexpected(self.offset(), &["'@'", "'#'", "'~'", "formula before 'U'"])),
        }
    }

    fn players(&mut self) -> Result<Players, ParseError> {
        let open = self.offset();
        self.expect(TokenKind::CoalitionOpen)?;
        let mut names = Vec::new();
        if self.eat(TokenKind::CoalitionClose) {
            return Ok(Players(names));
        }
        loop {
            match self.peek_kind() {
                Some(TokenKind::Atom) => names.push(self.bump().lexeme.clone()),
                _ => {
                    return Err(ParseError::UnknownCoalitionSyntax {
                        offset: self.offset(),
                        message: format!("expected player name in list opened at offset {open}"),
                    })
                }
            }
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.bump();
                }
                Some(TokenKind::CoalitionClose) => {
                    self.bump();
                    return Ok(Players(names));
                }
                _ => {
                    return Err(ParseError::UnknownCoalitionSyntax {
                        offset: self.offset(),
                        message: format!("expected ',' or '>>' in list opened at offset {open}"),
                    })
                }
            }
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.disjunction()?;
        while self.eat(TokenKind::Imply) {
            let rhs = self.disjunction()?;
            lhs = Formula::imply(lhs, rhs);
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(TokenKind::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat(TokenKind::And) {
            let rhs = self.negation()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Formula, ParseError> {
        if self.peek_kind() == Some(TokenKind::Not) {
            self.bump();
            self.enter()?;
            let inner = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.negation());
            self.depth -= 1;
            return Ok(Formula::not(inner?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek_kind() {
            Some(TokenKind::LParen) => {
                self.bump();
                let inner = self.formula()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            Some(TokenKind::Atom) => Ok(Formula::Atom(self.bump().lexeme.clone())),
            Some(TokenKind::True) => {
                self.bump();
                Ok(Formula::True)
            }
            Some(TokenKind::False) => {
                self.bump();
                Ok(Formula::False)
            }
            _ => Err(self.unexpected(
                self.offset(),
                &["'('", "proposition", "'true'", "'false'", "'not'"],
            )),
        }
    }
}

/// Prints `f` fully parenthesized so that `parse(&format(f)) == Ok(f)`.
pub fn format(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    stacker::maybe_grow(64 * 1024, 1024 * 1024, || write_formula_inner(f, out))
}

fn write_formula_inner(f: &Formula, out: &mut String) {
    let paren = |f: &Formula, out: &mut String| {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(name) => out.push_str(name),
        Formula::Not(inner) => {
            out.push_str("not ");
            paren(inner, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) => {
            let op = match f {
                Formula::And(..) => " and ",
                Formula::Or(..) => " or ",
                _ => " => ",
            };
            paren(a, out);
            out.push_str(op);
            paren(b, out);
        }
        Formula::Next(p, inner) | Formula::Always(p, inner) | Formula::Eventually(p, inner) => {
            out.push_str(&p.to_string());
            out.push(match f {
                Formula::Next(..) => '@',
                Formula::Always(..) => '#',
                _ => '~',
            });
            out.push(' ');
            paren(inner, out);
        }
        Formula::Until(p, a, b) => {
            out.push_str(&p.to_string());
            out.push(' ');
            paren(a, out);
            out.push_str(" U ");
            paren(b, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    fn p(names: &[&str]) -> Players {
        Players::new(names.iter().copied())
    }

    #[test]
    fn tokenizes_next_formula() {
        use TokenKind::*;
        let toks = tokenize("<<1>>@ (x and y)").unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![
                CoalitionOpen,
                Atom,
                CoalitionClose,
                Next,
                LParen,
                Atom,
                And,
                Atom,
                RParen
            ]
        );
        assert_eq!(toks[1].lexeme, "1");
        assert!(toks.windows(2).all(|w| w[0].offset < w[1].offset));
    }

    #[test]
    fn tokenizes_keywords_and_atoms() {
        use TokenKind::*;
        assert_eq!(kinds("true"), vec![True]);
        assert_eq!(kinds("111 and turn1"), vec![Atom, And, Atom]);
        assert_eq!(kinds("a => b = c"), vec![Atom, Imply, Atom, Imply, Atom]);
        assert_eq!(kinds("x U y"), vec![Atom, Until, Atom]);
        assert_eq!(kinds("Until"), vec![Atom]);
        assert_eq!(
            kinds("<<>>#p"),
            vec![CoalitionOpen, CoalitionClose, Always, Atom]
        );
    }

    #[test]
    fn rejects_stray_characters() {
        assert_eq!(
            tokenize("x ? y"),
            Err(ParseError::UnexpectedCharacter { offset: 2, ch: '?' })
        );
        assert!(matches!(
            tokenize("a < b"),
            Err(ParseError::UnexpectedCharacter { offset: 2, .. })
        ));
    }

    #[test]
    fn parses_until() {
        assert_eq!(
            parse("<<1>> true U x").unwrap(),
            Formula::until(p(&["1"]), Formula::True, Formula::atom("x"))
        );
    }

    #[test]
    fn parses_double_negation() {
        assert_eq!(
            parse("not not true").unwrap(),
            Formula::not(Formula::not(Formula::True))
        );
    }

    #[test]
    fn until_needs_left_operand() {
        assert!(matches!(
            parse("<<1>> U x"),
            Err(ParseError::SyntaxError { offset: 6, .. })
        ));
    }

    #[test]
    fn precedence() {
        let a = || Formula::atom("a");
        let b = || Formula::atom("b");
        let c = || Formula::atom("c");
        assert_eq!(
            parse("a or b and c").unwrap(),
            Formula::or(a(), Formula::and(b(), c()))
        );
        assert_eq!(
            parse("not a and b").unwrap(),
            Formula::and(Formula::not(a()), b())
        );
        assert_eq!(
            parse("<<1>>@ x or y").unwrap(),
            Formula::next(
                p(&["1"]),
                Formula::or(Formula::atom("x"), Formula::atom("y"))
            )
        );
        assert_eq!(
            parse("a => b = c").unwrap(),
            Formula::imply(Formula::imply(a(), b()), c())
        );
    }

    #[test]
    fn coalition_lists() {
        assert_eq!(
            parse("<<1,2>>~ (x and y)").unwrap(),
            Formula::eventually(
                p(&["1", "2"]),
                Formula::and(Formula::atom("x"), Formula::atom("y"))
            )
        );
        assert_eq!(
            parse("<< >> # p").unwrap(),
            Formula::always(p(&[]), Formula::atom("p"))
        );
        assert!(matches!(
            parse("<<1,>>@ x"),
            Err(ParseError::UnknownCoalitionSyntax { offset: 4, .. })
        ));
        assert!(matches!(
            parse("<<1 2>>@ x"),
            Err(ParseError::UnknownCoalitionSyntax { .. })
        ));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse(""),
            Err(ParseError::SyntaxError { offset: 0, .. })
        ));
        assert!(matches!(
            parse("(x"),
            Err(ParseError::SyntaxError { offset: 2, .. })
        ));
        assert!(matches!(
            parse("x y"),
            Err(ParseError::SyntaxError { offset: 2, .. })
        ));
        // Quantified formulas are not operands of boolean connectives.
        assert!(parse("x and <<1>>@ y").is_err());
        assert!(parse("x and (<<1>>@ y)").is_ok());
    }

    #[test]
    fn canonical_printing() {
        assert_eq!(
            format(&Formula::until(
                p(&["1"]),
                Formula::True,
                Formula::atom("x")
            )),
            "<<1>> (true) U (x)"
        );
        assert_eq!(format(&Formula::atom("x")), "x");
        assert_eq!(
            format(&Formula::always(p(&[]), Formula::atom("p"))),
            "<<>># (p)"
        );
    }

    #[test]
    fn depth_limit() {
        let deep = format!(
            "{}x{}",
            "(".repeat(MAX_DEPTH + 5),
            ")".repeat(MAX_DEPTH + 5)
        );
        assert!(matches!(parse(&deep), Err(ParseError::TooDeep { .. })));
        let nots = format!("{}x", "not ".repeat(MAX_DEPTH + 5));
        assert!(matches!(parse(&nots), Err(ParseError::TooDeep { .. })));
        let ok = format!("{}x{}", "(".repeat(5000), ")".repeat(5000));
        assert_eq!(parse(&ok).unwrap(), Formula::atom("x"));
    }
}
