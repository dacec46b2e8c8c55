# Objective package: center-based clustering objectives
