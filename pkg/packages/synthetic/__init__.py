from packages.synthetic.dgp import DgpConfig, DgpTruth, generate, generate_coords, region_labels

__all__ = ["DgpConfig", "DgpTruth", "generate", "generate_coords", "region_labels"]
