pub mod mask;
pub mod prove;
pub mod report;
