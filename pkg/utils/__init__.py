# __init__.py
# Console tee logger and CSV event-timing logger shared by the CLI
