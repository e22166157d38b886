//! Hamiltonian circuits: the graphs, the search, and the HAM corpus.

pub mod corpus;
mod graph;
mod search;

pub use graph::{complete_graph, cycle_graph, knight_graph, petersen_graph, Graph, GraphError};
pub use search::{
    brute_force_cycles, enumerate_hamiltonian_cycles, hamiltonian_cycles, HamSearch, TooLarge, BRUTE_FORCE_LIMIT,
};
