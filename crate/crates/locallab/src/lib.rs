//! Laboratory for locally checkable labelings on port-numbered networks:
//! neighborhood views, layered certification problems, instance generators,
//! ball-growing simulation, and safe-neighborhood search.

pub mod forge;
pub mod label;
pub mod lcl;
pub mod network;
pub mod pi;
pub mod safe;
pub mod sim;
pub mod turing;
