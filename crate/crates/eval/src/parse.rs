/// Last standalone option letter A-D in `raw`: an uppercase letter with no
/// alphanumeric character immediately before or after it.
pub fn parse_answer(raw: &str) -> Option<char> {
    let chars: Vec<char> = raw.chars().collect();
    (0..chars.len()).rev().find_map(|i| {
        let c = chars[i];
        let standalone = matches!(c, 'A'..='D')
            && (i == 0 || !chars[i - 1].is_alphanumeric())
            && chars.get(i + 1).is_none_or(|n| !n.is_alphanumeric());
        standalone.then_some(c)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(parse_answer("The answer is B."), Some('B'));
        assert_eq!(parse_answer("A is wrong; I choose (C)"), Some('C'));
        assert_eq!(parse_answer("cabbage"), None);
        assert_eq!(parse_answer(""), None);
    }
}
