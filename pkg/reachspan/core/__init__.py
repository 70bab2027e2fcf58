"""Robot model, kinematics/dynamics and horizon prediction"""
