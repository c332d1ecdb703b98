//! Motor command scripts.
//!
//! One record per line: `t_seconds xz_angle_rad thrust_mps tail_radps`.
//! Times must be strictly increasing. Blank lines and `#` comments are
//! ignored. A command stays latched until the next record.

use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCommand {
    pub t: f64,
    pub xz_angle: f64,
    pub thrust: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandScript {
    pub commands: Vec<MotorCommand>,
}

impl CommandScript {
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut commands: Vec<MotorCommand> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(ScriptError {
                    line,
                    message: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let mut vals = [0.0; 4];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f64::from_str(f)
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ScriptError {
                        line,
                        message: format!("invalid number '{f}'"),
                    })?;
            }
            if let Some(prev) = commands.last() {
                if vals[0] <= prev.t {
                    return Err(ScriptError {
                        line,
                        message: format!("time {} does not increase past {}", vals[0], prev.t),
                    });
                }
            }
            commands.push(MotorCommand {
                t: vals[0],
                xz_angle: vals[1],
                thrust: vals[2],
                tail: vals[3],
            });
        }
        Ok(Self { commands })
    }

    /// The command in force at time `t`, if any has started.
    pub fn active_at(&self, t: f64) -> Option<&MotorCommand> {
        self.commands.iter().take_while(|c| c.t <= t + 1e-9).last()
    }
}

impl std::fmt::Display for CommandScript {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.commands {
            writeln!(f, "{} {} {} {}", c.t, c.xz_angle, c.thrust, c.tail)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_blank_lines() {
        let s = CommandScript::parse("# header\n0 0 1 0\n\n5.5 0.1 2 -0.2 # turn\n").unwrap();
        assert_eq!(s.commands.len(), 2);
        assert_eq!(s.commands[1].tail, -0.2);
        assert_eq!(s.active_at(-1.0), None);
        assert_eq!(s.active_at(5.0).unwrap().t, 0.0);
        assert_eq!(s.active_at(5.5).unwrap().t, 5.5);
        assert_eq!(CommandScript::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn reports_line_numbers() {
        let e = CommandScript::parse("0 0 abc 0").unwrap_err();
        assert_eq!(e.line, 1);
        let e = CommandScript::parse("0 0 1 0\n# c\n1 2 3").unwrap_err();
        assert_eq!(e.line, 3);
        let e = CommandScript::parse("1 0 1 0\n1 0 1 0").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(CommandScript::parse("0 0 nan 0").is_err());
    }

    #[test]
    fn empty_script() {
        assert!(CommandScript::parse("").unwrap().commands.is_empty());
    }
}
