//! Recursive-descent parser for words and the line-oriented input format.
//!
//! ```text
//! group <name>
//!   gen <ident> [<ident> ...]
//!   rel <word> [, <word> ...]
//! end
//! action <B-name> on <A-name>
//!   <b> : <a> -> <word over A>
//!   inverse <b> : <a> -> <word over A>
//! end
//! ```
//!
//! Several relators on one `rel` line are separated by top-level commas.

use super::{is_identifier, ActionSpec, Alphabet, InputFile, Presentation, Word};
use crate::{Error, Result};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.bump() {
            Some(c) if c == want => Ok(()),
            Some(c) => Err(self.err(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.err(format!("expected `{want}`, found end of input"))),
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::Syntax(format!("{msg} at column {}", self.pos + 1))
    }

    fn at_word_end(&mut self) -> bool {
        matches!(self.peek(), None | Some(')') | Some(']') | Some(','))
    }

    fn word(&mut self) -> Result<Word> {
        if self.at_word_end() {
            return Err(self.err("expected a word".into()));
        }
        let mut acc = Word::identity();
        while !self.at_word_end() {
            let t = self.term()?;
            acc = &acc * &t;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Word> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.bump();
            let e = self.integer()?;
            if e == 0 {
                return Err(self.err("exponent 0 is not allowed".into()));
            }
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek_raw(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while matches!(self.peek_raw(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = &self.src[start..self.pos];
        text.parse::<i64>()
            .map_err(|_| self.err(format!("malformed exponent `{text}`")))
    }

    fn atom(&mut self) -> Result<Word> {
        match self.peek() {
            Some('(') => {
                self.bump();
                let w = self.word()?;
                self.expect(')')?;
                Ok(w)
            }
            Some('[') => {
                self.bump();
                let first = self.word()?;
                let mut rest = Vec::new();
                while self.peek() == Some(',') {
                    self.bump();
                    rest.push(self.word()?);
                }
                if rest.is_empty() {
                    return Err(self.err("commutator needs at least two entries".into()));
                }
                self.expect(']')?;
                Ok(Word::left_normed(&first, &rest))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek_raw(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                self.alphabet
                    .lookup(name)
                    .map(Word::generator)
                    .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
            }
            Some('1') => {
                self.pos += 1;
                if matches!(self.peek_raw(), Some(c) if c.is_ascii_alphanumeric()) {
                    return Err(self.err("malformed identity".into()));
                }
                Ok(Word::identity())
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input".into())),
        }
    }
}

/// Parses a word in the grammar
/// `word := term+ ; term := atom ('^' int)? ; atom := ident | (word) | [word,word] | 1`.
pub fn parse_word(text: &str, alphabet: &Alphabet) -> Result<Word> {
    let mut c = Cursor {
        src: text,
        pos: 0,
        alphabet,
    };
    let w = c.word()?;
    if let Some(ch) = c.peek() {
        return Err(c.err(format!("unexpected `{ch}`")));
    }
    Ok(w)
}

/// Splits on commas that are not inside brackets or parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

struct GroupDraft {
    name: String,
    alphabet: Alphabet,
    relator_lines: Vec<(usize, String)>,
}

struct ActionDraft {
    acting: String,
    acted: String,
    rows: Vec<(usize, bool, String, String, String)>,
}

enum Block {
    None,
    Group(GroupDraft),
    Action(ActionDraft),
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Lifts errors from word parsing to a line-numbered parse error.
fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => parse_err(line, other.to_string()),
    })
}

/// Parses a whole input file: any number of `group` blocks and at most one
/// `action` block.
pub fn parse_input_file(text: &str) -> Result<InputFile> {
    let mut groups: Vec<Presentation> = Vec::new();
    let mut actions: Vec<(usize, ActionDraft)> = Vec::new();
    let mut block = Block::None;
    let mut block_start = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, tail) = match content.split_once(char::is_whitespace) {
            Some((h, t)) => (h, t.trim()),
            None => (content, ""),
        };
        match (&mut block, head) {
            (Block::None, "group") => {
                if !is_identifier(tail) {
                    return Err(parse_err(line, format!("invalid group name `{tail}`")));
                }
                if groups.iter().any(|g| g.name == tail) {
                    return Err(parse_err(line, format!("duplicate group `{tail}`")));
                }
                block = Block::Group(GroupDraft {
                    name: tail.to_string(),
                    alphabet: Alphabet::default(),
                    relator_lines: Vec::new(),
                });
                block_start = line;
            }
            (Block::None, "action") => {
                let parts: Vec<&str> = tail.split_whitespace().collect();
                if parts.len() != 3 || parts[1] != "on" {
                    return Err(parse_err(line, "expected `action <B> on <A>`"));
                }
                block = Block::Action(ActionDraft {
                    acting: parts[0].to_string(),
                    acted: parts[2].to_string(),
                    rows: Vec::new(),
                });
                block_start = line;
            }
            (Block::Group(g), "gen") => {
                if tail.is_empty() {
                    return Err(parse_err(line, "`gen` needs at least one name"));
                }
                for name in tail.split_whitespace() {
                    at_line(line, g.alphabet.push(name, super::Slot::Plain).map(|_| ()))?;
                }
            }
            (Block::Group(g), "rel") => {
                if !tail.is_empty() {
                    g.relator_lines.push((line, tail.to_string()));
                }
            }
            (Block::Group(_), "end") => {
                let Block::Group(g) = std::mem::replace(&mut block, Block::None) else {
                    unreachable!()
                };
                let mut rels = Vec::new();
                for (l, text) in &g.relator_lines {
                    for piece in split_top_level(text) {
                        rels.push(at_line(*l, parse_word(piece, &g.alphabet))?);
                    }
                }
                groups.push(Presentation::new(&g.name, g.alphabet, rels)?);
            }
            (Block::Action(a), "end") => {
                let _ = a;
                let Block::Action(a) = std::mem::replace(&mut block, Block::None) else {
                    unreachable!()
                };
                actions.push((block_start, a));
            }
            (Block::Action(a), _) => {
                let (inverse, body) = match content.strip_prefix("inverse") {
                    Some(rest) if rest.starts_with(char::is_whitespace) => (true, rest.trim()),
                    _ => (false, content),
                };
                let Some((b, rest)) = body.split_once(':') else {
                    return Err(parse_err(line, "expected `<b> : <a> -> <word>`"));
                };
                let Some((a_name, w)) = rest.split_once("->") else {
                    return Err(parse_err(line, "expected `->` in action row"));
                };
                a.rows.push((
                    line,
                    inverse,
                    b.trim().to_string(),
                    a_name.trim().to_string(),
                    w.trim().to_string(),
                ));
            }
            (Block::None, other) => {
                return Err(parse_err(
                    line,
                    format!("unexpected `{other}` outside a block"),
                ));
            }
            (Block::Group(_), other) => {
                return Err(parse_err(
                    line,
                    format!("unexpected `{other}` in group block"),
                ));
            }
        }
    }
    match block {
        Block::None => {}
        _ => return Err(parse_err(block_start, "block not closed with `end`")),
    }
    if actions.len() > 1 {
        return Err(parse_err(
            actions[1].0,
            "at most one action block is allowed",
        ));
    }
    let action = match actions.pop() {
        None => None,
        Some((start, draft)) => Some(build_action(start, draft, &groups)?),
    };
    Ok(InputFile { groups, action })
}

fn build_action(start: usize, draft: ActionDraft, groups: &[Presentation]) -> Result<ActionSpec> {
    let find = |name: &str| {
        groups
            .iter()
            .find(|g| g.name == name)
            .cloned()
            .ok_or_else(|| parse_err(start, format!("unknown group `{name}`")))
    };
    let acting = find(&draft.acting)?;
    let acted = find(&draft.acted)?;
    let nb = acting.generator_count();
    let na = acted.generator_count();
    let mut images: Vec<Vec<Option<Word>>> = vec![vec![None; na]; nb];
    let mut inverse: Vec<Vec<Option<Word>>> = vec![vec![None; na]; nb];
    let mut any_inverse = false;
    for (line, is_inv, b, a, w) in draft.rows {
        let bi = acting.alphabet.lookup(&b).ok_or_else(|| {
            parse_err(line, format!("`{b}` is not a generator of {}", acting.name))
        })?;
        let ai = acted.alphabet.lookup(&a).ok_or_else(|| {
            parse_err(line, format!("`{a}` is not a generator of {}", acted.name))
        })?;
        let word = at_line(line, parse_word(&w, &acted.alphabet))?;
        let table = if is_inv {
            any_inverse = true;
            &mut inverse
        } else {
            &mut images
        };
        if table[bi][ai].is_some() {
            return Err(parse_err(line, format!("duplicate image for ({b}, {a})")));
        }
        table[bi][ai] = Some(word);
    }
    let finish = |t: Vec<Vec<Option<Word>>>, what: &str| -> Result<Vec<Vec<Word>>> {
        t.into_iter()
            .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| parse_err(start, format!("{what} incomplete")))
    };
    let images = finish(images, "action table")?;
    let inverse_images = if any_inverse {
        Some(finish(inverse, "inverse action table")?)
    } else {
        None
    };
    ActionSpec::new(acting, acted, images, inverse_images)
}
