use shapebench::bench::ManifestRecord;

pub const LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

/// Final line of every prompt.
pub const INSTRUCTION: &str = "Answer with the option letter only.";

/// Stem, then one `X. choice` line per option, then the letter-only instruction.
pub fn build_prompt(stem: &str, choices: &[String]) -> String {
    let mut out = String::with_capacity(stem.len() + 64);
    out.push_str(stem);
    out.push('\n');
    for (letter, choice) in LETTERS.iter().zip(choices) {
        out.push_str(&format!("{letter}. {choice}\n"));
    }
    out.push_str(INSTRUCTION);
    out
}

pub fn record_prompt(r: &ManifestRecord) -> String {
    build_prompt(&r.question, &r.choices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let choices: Vec<String> = ["circle", "square", "spiral", "line"].map(String::from).to_vec();
        let p = build_prompt("Which of the following shapes appears in the figure?", &choices);
        assert_eq!(
            p,
            "Which of the following shapes appears in the figure?\nA. circle\nB. square\nC. spiral\nD. line\nAnswer with the option letter only."
        );
        assert_eq!(
            p,
            build_prompt("Which of the following shapes appears in the figure?", &choices)
        );
        for c in &choices {
            assert_eq!(p.matches(&format!(". {c}\n")).count(), 1);
        }
        assert_eq!(p.lines().last(), Some(INSTRUCTION));
    }
}
