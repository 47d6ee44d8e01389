"""
URL configuration for minorbench.

Only the admin is routed; it lists recorded benchmark runs.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
