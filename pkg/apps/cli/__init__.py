"""spillover CLI application"""
