use super::frame::{decode_frame, Frame, LF, START};
use super::ProtocolError;

/// Longest run accepted between `$` and LF before the scanner gives up on
/// the frame. A maximal measurement frame is well under half of this.
pub const MAX_FRAME_LEN: usize = 96;

pub type ScanItem = Result<Frame, ProtocolError>;

/// Incremental frame scanner.
///
/// Bytes may be fed in chunks of any size; the emitted sequence depends
/// only on the concatenated input. Bytes outside a frame are discarded up
/// to the next `$`, and each discarded run is reported once, when the `$`
/// that ends it arrives.
#[derive(Debug, Default)]
pub struct FrameScanner {
    frame: Vec<u8>,
    in_frame: bool,
    discarded: usize,
    interrupted: bool,
}

impl FrameScanner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds a chunk, appending one item per complete frame or discarded
    /// run to `out`.
    pub fn feed_into(&mut self, bytes: &[u8], out: &mut Vec<ScanItem>) {
        for &b in bytes {
            if b == START {
                self.flush_discarded(out);
                self.frame.clear();
                self.frame.push(b);
                self.in_frame = true;
                continue;
            }
            if !self.in_frame {
                self.discarded += 1;
                continue;
            }
            self.frame.push(b);
            if b == LF {
                out.push(decode_frame(&self.frame));
                self.frame.clear();
                self.in_frame = false;
            } else if self.frame.len() > MAX_FRAME_LEN {
                self.discarded += self.frame.len();
                self.frame.clear();
                self.in_frame = false;
            }
        }
    }

    pub fn feed(&mut self, bytes: &[u8]) -> Vec<ScanItem> {
        let mut out = Vec::new();
        self.feed_into(bytes, &mut out);
        out
    }

    fn flush_discarded(&mut self, out: &mut Vec<ScanItem>) {
        if self.in_frame {
            // A '$' before LF: the open frame joins the discarded run.
            self.discarded += self.frame.len();
            self.interrupted = true;
        }
        if self.discarded > 0 {
            let detail = if self.interrupted {
                format!("frame interrupted; {} bytes discarded", self.discarded)
            } else {
                format!("{} stray bytes before frame start", self.discarded)
            };
            out.push(Err(ProtocolError::Incomplete(detail)));
        }
        self.discarded = 0;
        self.interrupted = false;
    }

    /// Bytes held back waiting for more input.
    pub fn pending_len(&self) -> usize {
        self.discarded + if self.in_frame { self.frame.len() } else { 0 }
    }

    /// True while a frame has started but its LF has not arrived.
    pub fn in_frame(&self) -> bool {
        self.in_frame
    }

    /// Drops any retained partial input. Returns the error describing what
    /// was dropped, if anything was.
    pub fn reset(&mut self) -> Option<ProtocolError> {
        let pending = self.pending_len();
        let was_in_frame = self.in_frame;
        self.frame.clear();
        self.in_frame = false;
        self.discarded = 0;
        self.interrupted = false;
        (pending > 0).then(|| {
            ProtocolError::Incomplete(if was_in_frame {
                format!("unterminated frame; {pending} bytes dropped")
            } else {
                format!("{pending} stray bytes dropped")
            })
        })
    }
}
