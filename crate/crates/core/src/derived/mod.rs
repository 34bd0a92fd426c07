//! Trees of guest structures and meet functions.

pub mod meet;
pub mod tree;

pub use meet::{
    all_meet_tables, bits, check_meet_law, meet_from_bit_vectors, meet_signature, realize_meet, MeetRealization,
    MEET_F, MEET_X, MEET_Y,
};
pub use tree::{
    build_tree, check_tree, check_tree_embedding, projection_template, show_word, tree_joint_embed, GuestJoiner,
    JointEmbedding, ProjectionJoiner, TreeEmbedding, TreeModel, TreeNode, Word, PROJECTION_PREDICATE,
};
