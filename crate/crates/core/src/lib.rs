pub mod metric;
pub mod pr;
pub mod tz;
pub mod facility;
pub mod convex;
pub mod relax;
pub mod exact;
