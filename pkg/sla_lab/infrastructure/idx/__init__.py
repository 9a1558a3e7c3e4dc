from sla_lab.infrastructure.idx.codec import (
    decode_images,
    decode_labels,
    encode_idx,
    export_csv,
    load_mnist_idx,
    write_idx,
)

__all__ = ["decode_images", "decode_labels", "encode_idx", "export_csv", "load_mnist_idx", "write_idx"]
