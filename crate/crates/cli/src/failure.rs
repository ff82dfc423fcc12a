use std::fmt;

/// A command failure tagged with its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config keys or values (exit 1).
    Usage(anyhow::Error),
    /// Input missing, unreadable or malformed (exit 2).
    Input(anyhow::Error),
    /// Anything else, including broken invariants and output errors (exit 3).
    Internal(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = match self {
            Failure::Usage(e) | Failure::Input(e) | Failure::Internal(e) => e,
        };
        write!(f, "{e:#}")
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

/// Tags an error with the exit-code class it belongs to.
pub trait Classify<T> {
    fn usage(self, ctx: &str) -> CmdResult<T>;
    fn input(self, ctx: &str) -> CmdResult<T>;
    fn internal(self, ctx: &str) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self, ctx: &str) -> CmdResult<T> {
        self.map_err(|e| Failure::Usage(e.into().context(ctx.to_owned())))
    }

    fn input(self, ctx: &str) -> CmdResult<T> {
        self.map_err(|e| Failure::Input(e.into().context(ctx.to_owned())))
    }

    fn internal(self, ctx: &str) -> CmdResult<T> {
        self.map_err(|e| Failure::Internal(e.into().context(ctx.to_owned())))
    }
}

/// Config and argument errors are usage errors; everything else from the
/// library while reading input is an input error.
pub fn classify_lib(e: evgen::Error, ctx: &str) -> Failure {
    use evgen::Error as E;
    match e {
        E::InvalidArgument(_) | E::UnknownKey(_) | E::BadValue { .. } | E::ConfigSyntax { .. } => {
            Failure::Usage(anyhow::Error::new(e).context(ctx.to_owned()))
        }
        E::Io(_) | E::Image { .. } | E::BadMagic { .. } | E::Truncated { .. } | E::MalformedRecord { .. } => {
            Failure::Input(anyhow::Error::new(e).context(ctx.to_owned()))
        }
        _ => Failure::Internal(anyhow::Error::new(e).context(ctx.to_owned())),
    }
}
