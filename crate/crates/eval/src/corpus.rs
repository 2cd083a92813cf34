//! Golden responses for the answer extractor, paired with the expected letter.

pub const PARSER_CORPUS: [(&str, Option<char>); 50] = [
    ("A", Some('A')),
    ("B", Some('B')),
    ("C", Some('C')),
    ("D", Some('D')),
    ("B.", Some('B')),
    ("(C)", Some('C')),
    ("[D]", Some('D')),
    ("Answer: A", Some('A')),
    ("The answer is B.", Some('B')),
    ("A is wrong; I choose (C)", Some('C')),
    ("cabbage", None),
    ("", None),
    ("   \n\t ", None),
    ("I cannot determine the answer from the image.", None),
    ("**B**", Some('B')),
    ("**Answer:** D", Some('D')),
    ("`C`", Some('C')),
    ("Option C", Some('C')),
    ("C) circle", Some('C')),
    ("The correct option is A, the circle.", Some('A')),
    (
        "Looking at the figure, there are three circles, so the answer is B",
        Some('B'),
    ),
    (
        "B\n\nExplanation: the triangle is in the upper-left quadrant.",
        Some('B'),
    ),
    ("First I considered A, then B, but the final answer is D.", Some('D')),
    ("ABCD", None),
    ("BAD", None),
    ("The shape is a DECAGON", None),
    ("a", None),
    ("b) square", None),
    ("Answer - C -", Some('C')),
    ("D!", Some('D')),
    ("C?", Some('C')),
    ("'B'", Some('B')),
    ("\"A\"", Some('A')),
    ("Choice: {D}", Some('D')),
    ("<answer>C</answer>", Some('C')),
    ("E", None),
    ("The answer is E.", None),
    ("A/B", Some('B')),
    ("B,C", Some('C')),
    ("Option B (0.30) matches the span.", Some('B')),
    ("My answer: A.\n", Some('A')),
    ("I'd go with C; it has the largest area.", Some('C')),
    ("Between C and D, D fits better.", Some('D')),
    ("1. A\n2. B", Some('B')),
    ("The figure shows a hexagon. Answer: B", Some('B')),
    ("CD-ROM", None),
    ("Not B2 but A", Some('A')),
    ("x=A1", None),
    ("Final answer:\n\n(D)", Some('D')),
    (
        "Step 1: count circles.\nStep 2: compare.\nTherefore, the answer is A.",
        Some('A'),
    ),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_answer;

    #[test]
    fn every_case_matches() {
        for (raw, want) in PARSER_CORPUS {
            assert_eq!(parse_answer(raw), want, "{raw:?}");
        }
    }
}
