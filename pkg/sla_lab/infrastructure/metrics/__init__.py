from sla_lab.infrastructure.metrics.csv_writer import HEADER, CsvMetricsWriter, append_table_rows, format_row

__all__ = ["HEADER", "CsvMetricsWriter", "append_table_rows", "format_row"]
