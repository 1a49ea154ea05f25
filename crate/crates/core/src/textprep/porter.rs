//! Porter suffix-stripping stemmer, following the reference implementation
//! distributed by its author (steps 1a through 5b, with the `bli -> ble` and
//! `logi -> log` revisions and the two-letter passthrough).

struct Stemmer {
    b: Vec<char>,
    /// Index of the last character of the current word.
    k: usize,
    /// End of the stem before the most recently matched suffix; `None` when
    /// the stem is empty.
    j: Option<usize>,
}

impl Stemmer {
    fn cons(&self, mut i: usize) -> bool {
        // A 'y' is a consonant at the start of a word or after a vowel; walk
        // back over runs of 'y' rather than recursing.
        let mut flip = false;
        while self.b[i] == 'y' {
            if i == 0 {
                return !flip;
            }
            flip = !flip;
            i -= 1;
        }
        let c = !matches!(self.b[i], 'a' | 'e' | 'i' | 'o' | 'u');
        c != flip
    }

    /// Number of vowel-consonant sequences in `b[0..=j]`.
    fn m(&self) -> usize {
        let Some(j) = self.j else { return 0 };
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > j {
                return n;
            }
            if !self.cons(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > j {
                    return n;
                }
                if self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > j {
                    return n;
                }
                if !self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        match self.j {
            Some(j) => (0..=j).any(|i| !self.cons(i)),
            None => false,
        }
    }

    fn double_c(&self, i: usize) -> bool {
        i >= 1 && self.b[i] == self.b[i - 1] && self.cons(i)
    }

    /// consonant-vowel-consonant ending at `i`, where the last consonant is
    /// not w, x or y.
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], 'w' | 'x' | 'y')
    }

    fn ends(&mut self, s: &str) -> bool {
        let s: Vec<char> = s.chars().collect();
        let len = s.len();
        if len > self.k + 1 {
            return false;
        }
        let start = self.k + 1 - len;
        if self.b[start..=self.k] != s[..] {
            return false;
        }
        self.j = start.checked_sub(1);
        true
    }

    fn set_to(&mut self, s: &str) {
        let start = self.j.map_or(0, |j| j + 1);
        self.b.truncate(start);
        self.b.extend(s.chars());
        self.k = self.b.len() - 1;
    }

    fn replace_if_measured(&mut self, s: &str) {
        if self.m() > 0 {
            self.set_to(s);
        }
    }

    fn truncate_to(&mut self, last: usize) {
        self.b.truncate(last + 1);
        self.k = last;
    }

    fn step1ab(&mut self) {
        if self.b[self.k] == 's' {
            if self.ends("sses") {
                self.truncate_to(self.k - 2);
            } else if self.ends("ies") {
                self.set_to("i");
            } else if self.b[self.k - 1] != 's' {
                self.truncate_to(self.k - 1);
            }
        }
        if self.ends("eed") {
            if self.m() > 0 {
                self.truncate_to(self.k - 1);
            }
        } else if (self.ends("ed") || self.ends("ing")) && self.vowel_in_stem() {
            let j = self.j.expect("vowel in stem implies a non-empty stem");
            self.truncate_to(j);
            if self.ends("at") {
                self.set_to("ate");
            } else if self.ends("bl") {
                self.set_to("ble");
            } else if self.ends("iz") {
                self.set_to("ize");
            } else if self.double_c(self.k) {
                if !matches!(self.b[self.k], 'l' | 's' | 'z') {
                    self.truncate_to(self.k - 1);
                }
            } else {
                self.j = Some(self.k);
                if self.m() == 1 && self.cvc(self.k) {
                    self.b.push('e');
                    self.k += 1;
                }
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends("y") && self.vowel_in_stem() {
            self.b[self.k] = 'i';
        }
    }

    /// Tries each `(suffix, replacement)` in order; the first suffix that
    /// matches decides, whether or not its measure condition holds.
    fn first_match(&mut self, rules: &[(&str, &str)]) {
        for (suffix, repl) in rules {
            if self.ends(suffix) {
                self.replace_if_measured(repl);
                return;
            }
        }
    }

    fn step2(&mut self) {
        if self.k == 0 {
            return;
        }
        let rules: &[(&str, &str)] = match self.b[self.k - 1] {
            'a' => &[("ational", "ate"), ("tional", "tion")],
            'c' => &[("enci", "ence"), ("anci", "ance")],
            'e' => &[("izer", "ize")],
            'l' => &[
                ("bli", "ble"),
                ("alli", "al"),
                ("entli", "ent"),
                ("eli", "e"),
                ("ousli", "ous"),
            ],
            'o' => &[("ization", "ize"), ("ation", "ate"), ("ator", "ate")],
            's' => &[
                ("alism", "al"),
                ("iveness", "ive"),
                ("fulness", "ful"),
                ("ousness", "ous"),
            ],
            't' => &[("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")],
            'g' => &[("logi", "log")],
            _ => return,
        };
        self.first_match(rules);
    }

    fn step3(&mut self) {
        let rules: &[(&str, &str)] = match self.b[self.k] {
            'e' => &[("icate", "ic"), ("ative", ""), ("alize", "al")],
            'i' => &[("iciti", "ic")],
            'l' => &[("ical", "ic"), ("ful", "")],
            's' => &[("ness", "")],
            _ => return,
        };
        self.first_match(rules);
    }

    fn step4(&mut self) {
        if self.k == 0 {
            return;
        }
        let suffixes: &[&str] = match self.b[self.k - 1] {
            'a' => &["al"],
            'c' => &["ance", "ence"],
            'e' => &["er"],
            'i' => &["ic"],
            'l' => &["able", "ible"],
            'n' => &["ant", "ement", "ment", "ent"],
            'o' => {
                let ion = self.ends("ion") && self.j.is_some_and(|j| matches!(self.b[j], 's' | 't'));
                if !ion && !self.ends("ou") {
                    return;
                }
                &[]
            }
            's' => &["ism"],
            't' => &["ate", "iti"],
            'u' => &["ous"],
            'v' => &["ive"],
            'z' => &["ize"],
            _ => return,
        };
        if !suffixes.is_empty() && !suffixes.iter().any(|s| self.ends(s)) {
            return;
        }
        if self.m() > 1 {
            match self.j {
                Some(j) => self.truncate_to(j),
                None => unreachable!("m > 1 implies a non-empty stem"),
            }
        }
    }

    fn step5(&mut self) {
        self.j = Some(self.k);
        if self.b[self.k] == 'e' {
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.truncate_to(self.k - 1);
                self.j = Some(self.k);
            }
        }
        if self.b[self.k] == 'l' && self.double_c(self.k) && self.m() > 1 {
            self.truncate_to(self.k - 1);
        }
    }
}

/// Stems a lowercase token. Tokens of one or two characters are returned
/// unchanged.
pub fn stem(token: &str) -> String {
    let b: Vec<char> = token.chars().collect();
    if b.len() <= 2 {
        return token.to_string();
    }
    let k = b.len() - 1;
    let mut s = Stemmer { b, k, j: None };
    s.step1ab();
    if s.k > 0 {
        s.step1c();
        s.step2();
        s.step3();
        s.step4();
        s.step5();
    }
    s.b.iter().collect()
}
