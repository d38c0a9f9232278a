//! Benchmark labels such as `10C10L2TL`: customers, `C`, sites, `L`, then
//! the link count (`2TL`), the terminal count (`8T`) or both (`4T4TL`).

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameValue {
    Links(usize),
    Terminals(usize),
    TerminalsAndLinks { terminals: usize, links: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceName {
    pub n: usize,
    pub p: usize,
    pub value: NameValue,
}

pub fn encode_name(n: usize, p: usize, value: NameValue) -> String {
    InstanceName { n, p, value }.to_string()
}

pub fn parse_name(s: &str) -> Result<InstanceName, Error> {
    s.parse()
}

impl fmt::Display for InstanceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}C{}L", self.n, self.p)?;
        match self.value {
            NameValue::Links(l) => write!(f, "{l}TL"),
            NameValue::Terminals(q) => write!(f, "{q}T"),
            NameValue::TerminalsAndLinks { terminals, links } => write!(f, "{terminals}T{links}TL"),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Num(&'a str),
    Word(&'a str),
}

impl Token<'_> {
    fn text(&self) -> &str {
        match self {
            Token::Num(s) | Token::Word(s) => s,
        }
    }
}

fn tokenize(s: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    while start < bytes.len() {
        let digit = bytes[start].is_ascii_digit();
        let mut end = start + 1;
        while end < bytes.len() && bytes[end].is_ascii_digit() == digit {
            end += 1;
        }
        let piece = &s[start..end];
        out.push(if digit { Token::Num(piece) } else { Token::Word(piece) });
        start = end;
    }
    out
}

impl FromStr for InstanceName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let err = |token: &str| Error::Name {
            name: s.to_string(),
            token: token.to_string(),
        };
        let tokens = tokenize(s);
        let mut it = tokens.iter();
        let num = |it: &mut std::slice::Iter<Token>| -> Result<usize, Error> {
            match it.next() {
                Some(Token::Num(d)) => d.parse().map_err(|_| err(d)),
                Some(t) => Err(err(t.text())),
                None => Err(err("end of name")),
            }
        };
        let word = |it: &mut std::slice::Iter<Token>, want: &str| -> Result<(), Error> {
            match it.next() {
                Some(Token::Word(w)) if *w == want => Ok(()),
                Some(t) => Err(err(t.text())),
                None => Err(err("end of name")),
            }
        };
        let n = num(&mut it)?;
        word(&mut it, "C")?;
        let p = num(&mut it)?;
        word(&mut it, "L")?;
        let first = num(&mut it)?;
        let value = match it.next() {
            Some(Token::Word("TL")) => NameValue::Links(first),
            Some(Token::Word("T")) => match it.next() {
                None => NameValue::Terminals(first),
                Some(Token::Num(d)) => {
                    let links = d.parse().map_err(|_| err(d))?;
                    word(&mut it, "TL")?;
                    NameValue::TerminalsAndLinks { terminals: first, links }
                }
                Some(t) => return Err(err(t.text())),
            },
            Some(t) => return Err(err(t.text())),
            None => return Err(err("end of name")),
        };
        if let Some(t) = it.next() {
            return Err(err(t.text()));
        }
        Ok(InstanceName { n, p, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_labels() {
        assert_eq!(encode_name(10, 10, NameValue::Links(2)), "10C10L2TL");
        assert_eq!(
            parse_name("20C20L8T").unwrap(),
            InstanceName { n: 20, p: 20, value: NameValue::Terminals(8) }
        );
        assert_eq!(
            parse_name("10C10L4T4TL").unwrap(),
            InstanceName {
                n: 10,
                p: 10,
                value: NameValue::TerminalsAndLinks { terminals: 4, links: 4 }
            }
        );
    }

    #[test]
    fn malformed_names_name_the_token() {
        let token = |s: &str| match parse_name(s) {
            Err(Error::Name { token, .. }) => token,
            other => panic!("expected name error, got {other:?}"),
        };
        assert_eq!(token("10X10L2TL"), "X");
        assert_eq!(token("10C10L2TX"), "TX");
        assert_eq!(token("10C10L"), "end of name");
        assert_eq!(token("10C10L2TL5"), "5");
        assert_eq!(token("C10L2TL"), "C");
    }

    fn value_strategy() -> impl Strategy<Value = NameValue> {
        prop_oneof![
            (0usize..500).prop_map(NameValue::Links),
            (0usize..500).prop_map(NameValue::Terminals),
            (0usize..500, 0usize..500)
                .prop_map(|(terminals, links)| NameValue::TerminalsAndLinks { terminals, links }),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(n in 1usize..1000, p in 1usize..1000, value in value_strategy()) {
            let name = encode_name(n, p, value);
            prop_assert_eq!(parse_name(&name).unwrap(), InstanceName { n, p, value });
        }
    }
}
