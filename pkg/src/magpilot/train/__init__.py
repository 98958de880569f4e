from magpilot.train.gradcheck import TINY_CONFIG, grad_check
from magpilot.train.loop import evaluate_split, train_loop
from magpilot.train.optim import AdamW, TrainConfig, cosine_lr

__all__ = ["AdamW", "TINY_CONFIG", "TrainConfig", "cosine_lr",
           "evaluate_split", "grad_check", "train_loop"]
