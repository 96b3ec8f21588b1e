"""Report writing and plotting."""
