//! Losses, Adam, and the identity-learning training loop.

mod adam;
mod loss;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::mse_loss;
pub use train::{
    evaluate, loss_and_grad, train_identity, train_identity_with, train_model, IdentityTask, TrainConfig, TrainLog,
    TrainReport,
};
