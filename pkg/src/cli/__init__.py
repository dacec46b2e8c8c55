# CLI package: batch commands behind the launcher
