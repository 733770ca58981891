//! The station web service: a page rebuilt every five minutes from
//! collector state and the last 24 hours of log, plus a small JSON API.
//!
//! | route | response |
//! |-------|----------|
//! | `GET /` | the current page, `text/html` |
//! | `GET /api/current` | latest record per station with a `stale` flag |
//! | `GET /api/history?station=&from=&to=` | logged records, `from <= rx_time < to` |
//! | `GET /healthz` | uptime and poll counters |

mod api;
mod page;
mod regen;
mod replay;

pub use api::{router, serve, ApiState, CurrentEntry};
pub use page::{render_page, PageModel, StationView, SUMMARY_WINDOW};
pub use regen::{next_boundary, regenerate_loop, PageSlot, PageSource, ServedPage};
pub use replay::{replay, Replay, ReplayOptions, ReplayedPage};
