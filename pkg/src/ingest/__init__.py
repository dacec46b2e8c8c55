# Ingest package: CSV input and output
