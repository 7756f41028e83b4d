use super::{Command, GcodeError, Motion, Program, Statement};

fn error(line: usize, message: impl Into<String>) -> GcodeError {
    GcodeError::Parse {
        line,
        message: message.into(),
    }
}

/// Letter and number of one word, e.g. `X12.5`.
fn split_word(word: &str, line: usize) -> Result<(char, &str), GcodeError> {
    let mut chars = word.chars();
    let letter = chars.next().expect("words are non-empty");
    if !letter.is_ascii_uppercase() {
        return Err(error(line, format!("unknown word `{word}`")));
    }
    Ok((letter, chars.as_str()))
}

fn number(text: &str, word: &str, line: usize) -> Result<f64, GcodeError> {
    let ok = !text.is_empty()
        && text
            .chars()
            .all(|c| c.is_ascii_digit() || c == '.' || c == '-' || c == '+');
    match text.parse::<f64>() {
        Ok(v) if ok && v.is_finite() => Ok(v),
        _ => Err(error(line, format!("malformed number in `{word}`"))),
    }
}

/// Parses text in the emitted dialect. Feeds are modal: a `G1` without an
/// `F` word inherits the last one, and is an error if there is none.
pub fn parse(text: &str) -> Result<Program, GcodeError> {
    let mut statements = Vec::new();
    let mut modal_feed: Option<f64> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (code, comment) = match raw.split_once(';') {
            Some((code, comment)) => (code, Some(comment)),
            None => (raw, None),
        };
        let mut words = code.split_whitespace();
        if let Some(head) = words.next() {
            let (letter, digits) = split_word(head, line)?;
            let kind = match (letter, digits.parse::<u32>()) {
                ('G', Ok(0)) => "G0",
                ('G', Ok(1)) => "G1",
                ('G', Ok(21)) => "G21",
                ('G', Ok(90)) => "G90",
                ('M', Ok(2)) => "M2",
                ('M', Ok(3)) => "M3",
                ('M', Ok(5)) => "M5",
                _ => return Err(error(line, format!("unsupported command `{head}`"))),
            };
            let mut motion = Motion::default();
            for word in words {
                if kind != "G0" && kind != "G1" {
                    return Err(error(
                        line,
                        format!("`{kind}` takes no parameters, found `{word}`"),
                    ));
                }
                let (letter, value) = split_word(word, line)?;
                let slot = match letter {
                    'X' => &mut motion.x,
                    'Y' => &mut motion.y,
                    'Z' => &mut motion.z,
                    'F' => &mut motion.feed,
                    _ => return Err(error(line, format!("unknown word `{word}`"))),
                };
                if slot.is_some() {
                    return Err(error(line, format!("`{letter}` given twice")));
                }
                *slot = Some(number(value, word, line)?);
            }
            if let Some(f) = motion.feed {
                if f <= 0.0 {
                    return Err(error(line, format!("feed must be positive, got {f}")));
                }
                modal_feed = Some(f);
            }
            let (command, feed) = match kind {
                "G0" => (Command::Rapid(motion), modal_feed),
                "G1" => {
                    if modal_feed.is_none() {
                        return Err(error(line, "G1 needs a feed (F word)"));
                    }
                    (Command::Linear(motion), modal_feed)
                }
                "G21" => (Command::Millimeters, None),
                "G90" => (Command::Absolute, None),
                "M2" => (Command::End, None),
                "M3" => (Command::DispenseOn, None),
                _ => (Command::DispenseOff, None),
            };
            statements.push(Statement {
                line,
                command,
                feed,
            });
        }
        if let Some(c) = comment {
            statements.push(Statement {
                line,
                command: Command::Comment(c.trim().to_string()),
                feed: None,
            });
        }
    }
    Ok(Program { statements })
}
