//! List values: splitting, quoting and glob matching.

/// Splits a list string into its elements.
pub fn split_list(s: &str) -> Result<Vec<String>, String> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        while i < b.len() && b[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= b.len() {
            return Ok(out);
        }
        match b[i] {
            b'{' => {
                let mut depth = 1;
                let start = i + 1;
                i += 1;
                while i < b.len() && depth > 0 {
                    match b[i] {
                        b'\\' => i += 1,
                        b'{' => depth += 1,
                        b'}' => depth -= 1,
                        _ => {}
                    }
                    i += 1;
                }
                if depth > 0 {
                    return Err("unmatched open brace in list".into());
                }
                out.push(s[start..i - 1].to_string());
                if i < b.len() && !b[i].is_ascii_whitespace() {
                    return Err("list element in braces followed by non-space".into());
                }
            }
            b'"' => {
                i += 1;
                let mut elem = String::new();
                loop {
                    match b.get(i) {
                        None => return Err("unmatched open quote in list".into()),
                        Some(b'"') => break,
                        Some(b'\\') if i + 1 < b.len() => {
                            i += 1;
                            push_escape(&mut elem, s, &mut i);
                        }
                        _ => push_char(&mut elem, s, &mut i),
                    }
                }
                i += 1;
                out.push(elem);
            }
            _ => {
                let mut elem = String::new();
                while i < b.len() && !b[i].is_ascii_whitespace() {
                    if b[i] == b'\\' && i + 1 < b.len() {
                        i += 1;
                        push_escape(&mut elem, s, &mut i);
                    } else {
                        push_char(&mut elem, s, &mut i);
                    }
                }
                out.push(elem);
            }
        }
    }
}

fn push_char(out: &mut String, s: &str, i: &mut usize) {
    let ch = s[*i..].chars().next().unwrap();
    out.push(ch);
    *i += ch.len_utf8();
}

fn push_escape(out: &mut String, s: &str, i: &mut usize) {
    match s.as_bytes()[*i] {
        b'n' => {
            out.push('\n');
            *i += 1;
        }
        b't' => {
            out.push('\t');
            *i += 1;
        }
        _ => push_char(out, s, i),
    }
}

fn braces_balanced(s: &str) -> bool {
    let mut depth = 0i32;
    let mut esc = false;
    for c in s.chars() {
        if esc {
            esc = false;
            continue;
        }
        match c {
            '\\' => esc = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0 && !esc
}

/// Quotes one element so that `split_list` gives it back unchanged.
pub fn quote_element(s: &str) -> String {
    if s.is_empty() {
        return "{}".into();
    }
    let special = |c: char| c.is_whitespace() || matches!(c, '{' | '}' | '[' | ']' | '$' | '"' | '\\' | ';');
    if !s.chars().any(special) && !s.starts_with('#') {
        return s.to_string();
    }
    if braces_balanced(s) && !s.ends_with('\\') {
        return format!("{{{s}}}");
    }
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if special(c) => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out
}

pub fn join_list<S: AsRef<str>>(items: &[S]) -> String {
    items.iter().map(|s| quote_element(s.as_ref())).collect::<Vec<_>>().join(" ")
}

/// Glob match with `*` and `?`.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_nested_and_quoted() {
        assert_eq!(split_list("a {b c} \"d e\" {}").unwrap(), ["a", "b c", "d e", ""]);
        assert_eq!(split_list("  {x {y z}}  ").unwrap(), ["x {y z}"]);
        assert!(split_list("{a").is_err());
        assert!(split_list("\"a").is_err());
    }

    #[test]
    fn glob() {
        assert!(glob_match("p*", "p1"));
        assert!(glob_match("*", ""));
        assert!(glob_match("a?c", "abc"));
        assert!(!glob_match("a?c", "ac"));
        assert!(glob_match("*b*d", "abcbd"));
    }

    proptest! {
        #[test]
        fn list_round_trip(items in proptest::collection::vec("[ -~\\n]{0,8}", 0..6)) {
            let joined = join_list(&items);
            prop_assert_eq!(split_list(&joined).unwrap(), items);
        }
    }
}
