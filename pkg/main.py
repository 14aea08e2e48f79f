"""
caIMDP synthesis - Main Entry Point

Robust finite-horizon controller synthesis for interval MDPs whose
transition bounds depend on a continuous action:
- Model validation and shape classification
- Pessimistic and optimistic value iteration
- Random instance generation and sampled-action comparison
"""
from app.cli import main


if __name__ == "__main__":
    main()
