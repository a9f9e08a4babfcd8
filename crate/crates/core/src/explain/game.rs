//! Cooperative games over the tokens of one input.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::models::TextClassifier;
use crate::scalar::Scalar;
use crate::text::Token;

/// A value function over subsets of `players()` players, given as membership flags.
pub trait CoalitionGame<T> {
    fn players(&self) -> usize;
    fn value(&self, present: &[bool]) -> T;
}

/// Closure-backed game, handy for synthetic value functions.
pub struct FnGame<F> {
    pub players: usize,
    pub value: F,
}

impl<T, F: Fn(&[bool]) -> T> CoalitionGame<T> for FnGame<F> {
    fn players(&self) -> usize {
        self.players
    }

    fn value(&self, present: &[bool]) -> T {
        (self.value)(present)
    }
}

/// How absent tokens are hidden from the model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Masking {
    /// Absent tokens are deleted and the rest rejoined in order.
    #[default]
    Remove,
    /// Absent tokens become padding in place (sequence models only; others
    /// treat it like removal).
    Pad,
}

/// The game "probability of Fake when only the tokens in S are shown".
pub struct TextGame<'a, C: ?Sized> {
    model: &'a C,
    tokens: &'a [Token],
    masking: Masking,
}

impl<'a, C: TextClassifier + ?Sized> TextGame<'a, C> {
    pub fn new(model: &'a C, tokens: &'a [Token], masking: Masking) -> Self {
        TextGame {
            model,
            tokens,
            masking,
        }
    }

    pub fn tokens(&self) -> &[Token] {
        self.tokens
    }
}

impl<C: TextClassifier + ?Sized> CoalitionGame<f64> for TextGame<'_, C> {
    fn players(&self) -> usize {
        self.tokens.len()
    }

    fn value(&self, present: &[bool]) -> f64 {
        let terms: Vec<Option<&str>> = match self.masking {
            Masking::Remove => self
                .tokens
                .iter()
                .zip(present)
                .filter(|(_, &p)| p)
                .map(|(t, _)| Some(t.surface.as_str()))
                .collect(),
            Masking::Pad => self
                .tokens
                .iter()
                .zip(present)
                .map(|(t, &p)| p.then_some(t.surface.as_str()))
                .collect(),
        };
        self.model.predict_terms(&terms)
    }
}

/// Value of the coalition given as a list of player indices.
pub fn coalition_value<T, G: CoalitionGame<T> + ?Sized>(game: &G, subset: &[usize]) -> T {
    let mut present = vec![false; game.players()];
    for &i in subset {
        present[i] = true;
    }
    game.value(&present)
}

pub(crate) fn key(present: &[bool]) -> Vec<u64> {
    let mut k = vec![0u64; present.len().div_ceil(64)];
    for (i, &p) in present.iter().enumerate() {
        if p {
            k[i / 64] |= 1 << (i % 64);
        }
    }
    k
}

/// Caches coalition values so repeated coalitions cost one model call.
pub(crate) struct Memo<'g, T, G: ?Sized> {
    game: &'g G,
    cache: RefCell<HashMap<Vec<u64>, T>>,
}

impl<'g, T: Scalar, G: CoalitionGame<T> + ?Sized> Memo<'g, T, G> {
    pub fn new(game: &'g G) -> Self {
        Memo {
            game,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn value(&self, present: &[bool]) -> T {
        let k = key(present);
        if let Some(&v) = self.cache.borrow().get(&k) {
            return v;
        }
        let v = self.game.value(present);
        self.cache.borrow_mut().insert(k, v);
        v
    }
}
