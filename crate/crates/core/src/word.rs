//! Group elements of `D∞ = ⟨a, b | a² = b² = e⟩` as reduced words.
//!
//! A reduced word never repeats a letter, so it alternates between `a` and
//! `b`. Two representations are provided:
//!
//! * [`GroupWord`] stores every letter and reduces by literal cancellation.
//!   It is the reference representation used by traces and the coupling
//!   checks.
//! * [`CompactWord`] stores only the leftmost letter and the length, which
//!   determine an alternating word completely. It steps in O(1).

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub const fn complement(self) -> Self {
        match self {
            Letter::A => Letter::B,
            Letter::B => Letter::A,
        }
    }

    pub const fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'a' => Ok(Letter::A),
            'b' => Ok(Letter::B),
            other => Err(Error::InvalidLetter(other)),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A reduced word, i.e. an element of `D∞`.
///
/// Letters are held rightmost-first internally so that left multiplication
/// is a push or a pop at the end of the buffer. [`GroupWord::letters`]
/// yields them leftmost-first, which is how the word is written.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GroupWord {
    rev: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a word from letters written leftmost-first. The sequence must
    /// already be reduced.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Result<Self> {
        let mut rev: Vec<Letter> = letters.into_iter().collect();
        if let Some(i) = rev.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::NotReduced(i + 1));
        }
        rev.reverse();
        Ok(Self { rev })
    }

    /// Word length. The empty word is [`GroupWord::is_identity`].
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.rev.len()
    }

    pub fn is_identity(&self) -> bool {
        self.rev.is_empty()
    }

    pub fn leftmost(&self) -> Option<Letter> {
        self.rev.last().copied()
    }

    pub fn rightmost(&self) -> Option<Letter> {
        self.rev.first().copied()
    }

    /// Letters leftmost-first.
    pub fn letters(&self) -> impl DoubleEndedIterator<Item = Letter> + ExactSizeIterator + '_ {
        self.rev.iter().rev().copied()
    }

    /// Replaces `self` by the reduced form of `g · self`.
    pub fn left_multiply(&mut self, g: Letter) {
        if self.rev.last() == Some(&g) {
            self.rev.pop();
        } else {
            self.rev.push(g);
        }
    }

    pub fn to_compact(&self) -> CompactWord {
        CompactWord {
            head: self.leftmost(),
            len: self.rev.len() as u64,
        }
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("e");
        }
        for l in self.letters() {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = Error;

    /// Parses `"e"` (or the empty string) as the identity, otherwise a
    /// reduced string over `{a, b}`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(Self::identity());
        }
        let letters = s
            .chars()
            .map(Letter::from_char)
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(letters)
    }
}

/// Reduced form of `g · w`.
pub fn reduce_left_multiply(g: Letter, w: &GroupWord) -> GroupWord {
    let mut out = w.clone();
    out.left_multiply(g);
    out
}

/// Distance from the identity in the Cayley graph: the letter count.
pub fn word_metric(w: &GroupWord) -> u64 {
    w.len() as u64
}

/// `+|w|` on the branch of the Cayley graph containing `a`, `−|w|` on the
/// branch containing `b`, and `0` at the identity.
///
/// The rightmost letter of `w` is the first step that has not been
/// cancelled, so it names the branch.
pub fn signed_location(w: &GroupWord) -> i64 {
    branch_sign(w.rightmost()) * w.len() as i64
}

fn branch_sign(rightmost: Option<Letter>) -> i64 {
    match rightmost {
        None => 0,
        Some(Letter::A) => 1,
        Some(Letter::B) => -1,
    }
}

/// An alternating word stored as its leftmost letter and its length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CompactWord {
    head: Option<Letter>,
    len: u64,
}

impl CompactWord {
    pub fn identity() -> Self {
        Self::default()
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_identity(&self) -> bool {
        self.len == 0
    }

    pub fn leftmost(&self) -> Option<Letter> {
        self.head
    }

    pub fn rightmost(&self) -> Option<Letter> {
        self.head
            .map(|h| if self.len % 2 == 1 { h } else { h.complement() })
    }

    pub fn left_multiply(&mut self, g: Letter) {
        if self.head == Some(g) {
            self.len -= 1;
            self.head = (self.len > 0).then(|| g.complement());
        } else {
            self.len += 1;
            self.head = Some(g);
        }
    }

    pub fn signed_location(&self) -> i64 {
        branch_sign(self.rightmost()) * self.len as i64
    }

    /// Expands into the letter-by-letter representation.
    pub fn to_word(&self) -> GroupWord {
        let mut rev = Vec::with_capacity(self.len as usize);
        if let Some(r) = self.rightmost() {
            let mut l = r;
            for _ in 0..self.len {
                rev.push(l);
                l = l.complement();
            }
        }
        GroupWord { rev }
    }
}
