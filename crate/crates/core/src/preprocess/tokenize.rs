use unicode_general_category::{get_general_category, GeneralCategory as G};

/// True for characters in the Unicode punctuation (P*) and symbol (S*)
/// general categories.
pub fn is_punct_or_symbol(c: char) -> bool {
    matches!(
        get_general_category(c),
        G::ConnectorPunctuation
            | G::DashPunctuation
            | G::OpenPunctuation
            | G::ClosePunctuation
            | G::InitialPunctuation
            | G::FinalPunctuation
            | G::OtherPunctuation
            | G::MathSymbol
            | G::CurrencySymbol
            | G::ModifierSymbol
            | G::OtherSymbol
    )
}

/// True when `token` is a single punctuation or symbol character.
pub fn is_punct_token(token: &str) -> bool {
    let mut chars = token.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if is_punct_or_symbol(c))
}

/// Splits on whitespace and emits every punctuation or symbol character as
/// its own token.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if is_punct_or_symbol(c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    if lowercase {
        for t in &mut tokens {
            *t = t.to_lowercase();
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_trailing_period() {
        assert_eq!(tokenize("The cat sat.", true), ["the", "cat", "sat", "."]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("", true).is_empty());
        assert!(tokenize(" \t\n", false).is_empty());
    }

    #[test]
    fn contraction_is_split() {
        assert_eq!(tokenize("don't", true), ["don", "'", "t"]);
    }

    #[test]
    fn symbols_and_case() {
        assert_eq!(
            tokenize("Cost: $5+tax", false),
            ["Cost", ":", "$", "5", "+", "tax"]
        );
        assert_eq!(tokenize("«Über»", true), ["«", "über", "»"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_own_output(text in "\\PC{0,40}", lower in any::<bool>()) {
            let once = tokenize(&text, lower);
            let again = tokenize(&once.join(" "), lower);
            prop_assert_eq!(&again, &once);
            prop_assert!(once.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        }
    }
}
