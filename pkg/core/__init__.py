"""hankellab numerical core"""
