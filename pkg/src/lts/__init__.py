# Initialize module
